#pragma once

// The COGARCH pair X = (G, V) with V = log sigma^2, driven by a scalar Lévy
// process Z:
//
//   G_t = g + \int_0^t sigma_{s-} dZ_s
//   d sigma_t^2 = beta dt + sigma_t^2 ( log(delta) dt + (lambda/delta) d[Z,Z]^disc_t )
//
// with 0 < delta < 1, beta > 0, lambda >= 0.  Between jumps sigma^2 follows
// the linear ODE (sigma^2)' = beta + sigma^2 log(delta), solved in closed
// form; at a jump of size dz the state moves by
//
//   dG = sigma_{-} dz,      dV = log(1 + (lambda/delta) dz^2).
//
// Simulation is jump-adapted: volatility evolves exactly between jumps, the
// G-increment over a continuous segment is
//   drift_eff * \int sigma ds + sqrt(Q * \int sigma^2 ds) * standard normal,
// where \int sigma^2 ds has a closed form and \int sigma ds uses Simpson on
// a sub-grid.  The first component is homogeneous in space: the engine
// tracks only the displacement g - g_0, so paths started at different g
// with the same seed are bitwise translates.
//
// Optionally the path is stopped (not killed: frozen at its exit value) at
// the first event time where max(|g - g_0|, |v - v_0|) > R; the max-norm
// makes the exit test exact at grid points, and the small-time limits the
// library estimates are norm-independent.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "levy.hpp"
#include "rng.hpp"

namespace cogarch {

struct CogarchParams {
    double beta = 1.0;   // > 0
    double delta = 0.5;  // in (0, 1)
    double lam = 0.0;    // >= 0, squared-jump feedback strength
    LevyTriplet driver;
};

inline void validate(const CogarchParams& p) {
    if (!(p.delta > 0.0 && p.delta < 1.0))
        throw std::invalid_argument("cogarch params: constraint 0 < delta < 1 violated (got " +
                                    std::to_string(p.delta) + ")");
    if (!(p.beta > 0.0))
        throw std::invalid_argument("cogarch params: constraint beta > 0 violated (got " +
                                    std::to_string(p.beta) + ")");
    if (!(p.lam >= 0.0))
        throw std::invalid_argument("cogarch params: constraint lambda >= 0 violated (got " +
                                    std::to_string(p.lam) + ")");
    validate(p.driver);
}

// lambda/delta, the coefficient in front of the squared jump both in the
// volatility SDE and in the state-space jump map.
inline double feedback_ratio(const CogarchParams& p) noexcept { return p.lam / p.delta; }

struct StatePoint {
    double g = 0.0; // level component
    double v = 0.0; // log squared volatility: sigma^2 = e^v
};

// Log-volatility increment caused by a driver jump of size w.  This single
// expression is shared by the simulator, the symbol, the generator and the
// characteristics so that all of them agree bitwise on the jump map.
inline double log_volatility_jump(double w, double ratio) noexcept {
    return std::log1p(ratio * w * w);
}

// ---------------------------------------------------------------------------
// Deterministic volatility flow between jumps

// sigma^2(dt) started from sigma^2(0) = e^v:
//   sigma^2(dt) = F + (e^v - F) e^{dt log(delta)},   F = -beta/log(delta),
// the exact solution of (sigma^2)' = beta + sigma^2 log(delta).  Written in
// this fixed-point-anchored form so that e^v == F is preserved exactly.
inline double variance_after(double v, double dt, const CogarchParams& p) {
    const double L = std::log(p.delta);
    const double F = -p.beta / L;
    return F + (std::exp(v) - F) * std::exp(dt * L);
}

inline double evolve_volatility_between_jumps(double v, double dt, const CogarchParams& p) {
    if (dt == 0.0) return v;
    return std::log(variance_after(v, dt, p));
}

// \int_0^dt sigma^2(s) ds in closed form:
//   F dt + (e^v - F)(e^{dt L} - 1)/L,   L = log(delta), F = -beta/L.
inline double variance_integral_between_jumps(double v, double dt, const CogarchParams& p) {
    if (dt == 0.0) return 0.0;
    const double L = std::log(p.delta);
    const double F = -p.beta / L;
    return F * dt + (std::exp(v) - F) * std::expm1(dt * L) / L;
}

// \int_0^dt sigma(s) ds by composite Simpson on the closed-form sigma^2;
// no closed form exists for the square root of an affine exponential.
inline double sigma_integral_between_jumps(double v, double dt, const CogarchParams& p,
                                           int n_sub = 4) {
    if (dt == 0.0) return 0.0;
    if (n_sub < 2) n_sub = 2;
    if (n_sub % 2 != 0) ++n_sub;
    const double h = dt / n_sub;
    double acc = std::sqrt(variance_after(v, 0.0, p)) + std::sqrt(variance_after(v, dt, p));
    for (int k = 1; k < n_sub; ++k) {
        acc += (k % 2 == 1 ? 4.0 : 2.0) * std::sqrt(variance_after(v, k * h, p));
    }
    return acc * h / 3.0;
}

// State after a driver jump of size dz (dz != 0): the level moves by
// sigma_{-} dz, the log-volatility by log(1 + (lambda/delta) dz^2) >= 0.
inline StatePoint apply_jump(const StatePoint& state, double dz, const CogarchParams& p) {
    return {state.g + std::exp(state.v / 2.0) * dz,
            state.v + log_volatility_jump(dz, feedback_ratio(p))};
}

// ---------------------------------------------------------------------------
// Path engine

struct JumpRecord {
    double time = 0.0;
    double dz = 0.0; // driver jump
    double dg = 0.0; // induced level jump sigma_{-} dz
    double dv = 0.0; // induced log-volatility jump
};

struct PathStop {
    double time = 0.0;
    // only one stop reason exists: first exit from the max-norm ball
    static constexpr const char* reason = "exit-radius";
};

struct SamplePath {
    // Event grid including 0; a jump time appears twice, carrying the
    // pre-jump (left limit) and post-jump state in order.
    std::vector<double> grid_times;
    std::vector<StatePoint> states;
    std::vector<JumpRecord> jump_records;
    std::optional<PathStop> stopped_at;
};

struct PathEngineConfig {
    double t_max = 1.0;
    double step = 0.01;                    // grid spacing between jumps
    std::optional<double> exit_radius;     // R of the stopping ball; nullopt = no stopping
    double jump_cutoff = 1e-3;             // eps for density drivers (ignored for atoms)
    std::vector<double> extra_times;       // observation times to force onto the grid
    int sigma_sub_steps = 4;               // Simpson sub-steps for \int sigma ds per segment
};

namespace detail {

// Observer feature probes: drive_path reports to whatever callbacks the
// observer defines; undefined ones cost nothing.
template <class Obs>
concept has_on_interval = requires(Obs o) {
    o.on_interval(0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
};
template <class Obs>
concept has_on_jump = requires(Obs o) {
    o.on_jump(JumpRecord{});
};
template <class Obs>
concept has_on_state = requires(Obs o, StatePoint s) {
    o.on_state(0.0, s);
};
template <class Obs>
concept has_on_stop = requires(Obs o) {
    o.on_stop(0.0);
};

inline std::vector<double> merge_event_times(double t_max, double step,
                                             const std::vector<double>& extra,
                                             const std::vector<double>& jumps) {
    std::vector<double> times;
    times.push_back(0.0);
    for (std::size_t k = 1; k * step < t_max; ++k) times.push_back(k * step);
    times.push_back(t_max);
    for (double t : extra) {
        if (t > 0.0 && t <= t_max) times.push_back(t);
    }
    for (double t : jumps) times.push_back(t); // sampler guarantees (0, t_max]
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    return times;
}

} // namespace detail

// Drive one path from `start` and stream its events into `obs`.  Pure in
// (start, params, cfg, seed).  The log-volatility is always computed from
// the closed-form flow anchored at the last volatility jump, so for
// lambda = 0 the V-path is the exact deterministic ODE solution whatever
// the jump times are.
template <class Observer>
void drive_path(const StatePoint& start, const CogarchParams& params, const PathEngineConfig& cfg,
                std::uint64_t seed, Observer&& obs) {
    if (!(cfg.t_max > 0.0)) throw std::invalid_argument("drive_path: t_max must be > 0");
    if (!(cfg.step > 0.0)) throw std::invalid_argument("drive_path: step must be > 0");

    const double ratio = feedback_ratio(params);
    const double drift_eff = effective_drift(params.driver, cfg.jump_cutoff);
    const double Q = params.driver.gaussian;

    const PathSkeleton skel =
        sample_skeleton(params.driver, cfg.t_max, cfg.jump_cutoff, derive_stream(seed, 0));
    SplitMix64 gauss(derive_stream(seed, 1));

    const std::vector<double> times =
        detail::merge_event_times(cfg.t_max, cfg.step, cfg.extra_times, skel.jump_times);

    // displacement representation: g_t = start.g + disp
    double disp = 0.0;
    // volatility flow anchor: v(t) = evolve(v_anchor, t - t_anchor)
    double v_anchor = start.v;
    double t_anchor = 0.0;

    bool stopped = false;
    StatePoint frozen{};

    if constexpr (detail::has_on_state<Observer>) obs.on_state(0.0, start);

    std::size_t j = 0; // next skeleton jump
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const double t0 = times[k];
        const double t1 = times[k + 1];

        if (stopped) {
            if constexpr (detail::has_on_state<Observer>) obs.on_state(t1, frozen);
            continue;
        }

        const double dt = t1 - t0;
        const double v0 = evolve_volatility_between_jumps(v_anchor, t0 - t_anchor, params);
        const double var_int = variance_integral_between_jumps(v0, dt, params);
        double sig_int = 0.0;
        if (drift_eff != 0.0 || detail::has_on_interval<Observer>) {
            sig_int = sigma_integral_between_jumps(v0, dt, params, cfg.sigma_sub_steps);
        }
        double dg_cont = drift_eff * sig_int;
        if (Q > 0.0 && dt > 0.0) dg_cont += std::sqrt(Q * var_int) * gauss.normal();
        disp += dg_cont;

        double v1 = evolve_volatility_between_jumps(v_anchor, t1 - t_anchor, params);
        if constexpr (detail::has_on_interval<Observer>) {
            obs.on_interval(t0, t1, v0, sig_int, var_int, dg_cont);
        }

        while (j < skel.jump_times.size() && skel.jump_times[j] == t1) {
            if constexpr (detail::has_on_state<Observer>) {
                obs.on_state(t1, {start.g + disp, v1}); // left limit at the jump
            }
            JumpRecord rec;
            rec.time = t1;
            rec.dz = skel.jump_sizes[j];
            rec.dg = std::exp(v1 / 2.0) * rec.dz;
            rec.dv = log_volatility_jump(rec.dz, ratio);
            disp += rec.dg;
            if (rec.dv != 0.0) {
                v1 += rec.dv;
                v_anchor = v1;
                t_anchor = t1;
            }
            if constexpr (detail::has_on_jump<Observer>) obs.on_jump(rec);
            ++j;
        }

        const StatePoint now{start.g + disp, v1};
        if constexpr (detail::has_on_state<Observer>) obs.on_state(t1, now);

        if (cfg.exit_radius &&
            std::max(std::abs(disp), std::abs(v1 - start.v)) > *cfg.exit_radius) {
            stopped = true;
            frozen = now;
            if constexpr (detail::has_on_stop<Observer>) obs.on_stop(t1);
        }
    }
}

// Full path record (grid states, jump records, stop marker).
inline SamplePath simulate_path(const StatePoint& start, const CogarchParams& params,
                                double t_max, double step, std::optional<double> exit_radius,
                                std::uint64_t seed, double jump_cutoff = 1e-3) {
    validate(params);
    PathEngineConfig cfg;
    cfg.t_max = t_max;
    cfg.step = step;
    cfg.exit_radius = exit_radius;
    cfg.jump_cutoff = jump_cutoff;

    struct Recorder {
        SamplePath path;
        void on_state(double t, const StatePoint& s) {
            path.grid_times.push_back(t);
            path.states.push_back(s);
        }
        void on_jump(const JumpRecord& r) { path.jump_records.push_back(r); }
        void on_stop(double t) { path.stopped_at = PathStop{t}; }
    } rec;
    drive_path(start, params, cfg, seed, rec);
    return std::move(rec.path);
}

// States of the stopped process X^{T ^ t} at the requested times only;
// the cheap backend for Monte-Carlo estimators.
struct PathSnapshots {
    std::vector<StatePoint> at;        // one per requested time, in input order
    std::optional<double> stopped_at;  // exit time if the path left the ball
};

inline PathSnapshots simulate_snapshots(const StatePoint& start, const CogarchParams& params,
                                        const std::vector<double>& t_targets,
                                        std::optional<double> exit_radius, double step,
                                        std::uint64_t seed, double jump_cutoff = 1e-3) {
    PathEngineConfig cfg;
    cfg.t_max = t_targets.empty() ? 1.0 : *std::max_element(t_targets.begin(), t_targets.end());
    cfg.step = step;
    cfg.exit_radius = exit_radius;
    cfg.jump_cutoff = jump_cutoff;
    cfg.extra_times = t_targets;

    struct Catcher {
        const std::vector<double>* targets;
        PathSnapshots snaps;
        void on_state(double t, const StatePoint& s) {
            for (std::size_t i = 0; i < targets->size(); ++i) {
                // exact match: targets are forced onto the event grid; the
                // last call at a jump time wins, giving the post-jump state
                if ((*targets)[i] == t) snaps.at[i] = s;
            }
        }
        void on_stop(double t) { snaps.stopped_at = t; }
    } catcher;
    catcher.targets = &t_targets;
    catcher.snaps.at.resize(t_targets.size());
    drive_path(start, params, cfg, seed, catcher);
    return std::move(catcher.snaps);
}

// Fraction of paths stopped at or before each ladder time.
struct ExitSummary {
    std::vector<double> times;
    std::vector<double> stopped_fraction;
};

inline ExitSummary exit_time_statistics(const std::vector<std::optional<double>>& stop_times,
                                        const std::vector<double>& ladder) {
    ExitSummary summary;
    summary.times = ladder;
    summary.stopped_fraction.resize(ladder.size(), 0.0);
    if (stop_times.empty()) return summary;
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        std::size_t count = 0;
        for (const auto& stop : stop_times) {
            if (stop && *stop <= ladder[i]) ++count;
        }
        summary.stopped_fraction[i] = static_cast<double>(count) / stop_times.size();
    }
    return summary;
}

inline ExitSummary exit_time_statistics(const std::vector<SamplePath>& paths,
                                        const std::vector<double>& ladder) {
    std::vector<std::optional<double>> stops;
    stops.reserve(paths.size());
    for (const auto& p : paths) {
        stops.push_back(p.stopped_at ? std::optional<double>(p.stopped_at->time) : std::nullopt);
    }
    return exit_time_statistics(stops, ladder);
}

} // namespace cogarch
