#pragma once

// Monte-Carlo estimator of the probabilistic symbol
//
//   p(x, xi) = -lim_{t -> 0} E^x [ ( e^{i (X^{T ^ t} - x).xi} - 1 ) / t ],
//
// where T is the first exit time from the max-norm ball of radius R around
// the start; the limit is independent of the choice of R.  This estimator
// never looks at the closed form — it is the independent oracle the
// closed-form symbol is verified against.
//
// Estimation protocol:
//   * every path i draws from its own stream derived from (seed, i), so
//     worker partitioning cannot change any sample;
//   * one simulated path serves every ladder time and every frequency xi
//     (common random numbers): only the state increments at the ladder
//     times are stored;
//   * the t -> 0 limit is the weighted-least-squares intercept over the
//     ladder (see estimator.hpp).

#include <array>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cogarch.hpp"
#include "estimator.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace cogarch {

struct McSymbolConfig {
    double R = 1.0;                                 // stopping radius, > 0
    std::vector<double> t_ladder = {0.02, 0.01, 0.005};
    long n_paths = 100000;                          // >= 2
    std::uint64_t seed = 1;
    int workers = 0;                                // 0 = hardware concurrency
    double step = 0.005;                            // simulation grid between jumps
    double jump_cutoff = 1e-3;                      // eps for density drivers
};

// State increments of the stopped process at the ladder times, one row per
// path; the shared raw material for every (xi)-estimate at this start.
struct IncrementTable {
    std::vector<double> dg;     // path-major: [i * n_t + k]
    std::vector<double> dv;
    std::vector<double> stop_time; // exit time per path, NaN if never stopped
    long n_paths = 0;
    std::vector<double> t_ladder;
};

inline IncrementTable simulate_increments(const StatePoint& x, const CogarchParams& params,
                                          const McSymbolConfig& cfg) {
    validate(params);
    if (!(cfg.R > 0.0)) throw std::invalid_argument("mc symbol: stopping radius must be > 0");
    if (cfg.n_paths < 2) throw std::invalid_argument("mc symbol: need at least 2 paths");
    if (cfg.t_ladder.empty()) throw std::invalid_argument("mc symbol: empty t ladder");
    for (double t : cfg.t_ladder)
        if (!(t > 0.0)) throw std::invalid_argument("mc symbol: ladder times must be > 0");

    const std::size_t n_t = cfg.t_ladder.size();
    IncrementTable table;
    table.n_paths = cfg.n_paths;
    table.t_ladder = cfg.t_ladder;
    table.dg.resize(static_cast<std::size_t>(cfg.n_paths) * n_t);
    table.dv.resize(static_cast<std::size_t>(cfg.n_paths) * n_t);
    table.stop_time.resize(static_cast<std::size_t>(cfg.n_paths),
                           std::numeric_limits<double>::quiet_NaN());

    parallel_for_chunks(cfg.n_paths, cfg.workers, [&](long begin, long end) {
        for (long i = begin; i < end; ++i) {
            const PathSnapshots snaps =
                simulate_snapshots(x, params, cfg.t_ladder, cfg.R, cfg.step,
                                   derive_stream(cfg.seed, static_cast<std::uint64_t>(i)),
                                   cfg.jump_cutoff);
            for (std::size_t k = 0; k < n_t; ++k) {
                table.dg[static_cast<std::size_t>(i) * n_t + k] = snaps.at[k].g - x.g;
                table.dv[static_cast<std::size_t>(i) * n_t + k] = snaps.at[k].v - x.v;
            }
            if (snaps.stopped_at) table.stop_time[static_cast<std::size_t>(i)] = *snaps.stopped_at;
        }
    });
    return table;
}

// Turn stored increments into the estimator samples for one frequency and
// extrapolate the ladder.
inline EstimatorResult estimate_from_increments(const IncrementTable& table,
                                                const std::array<double, 2>& xi, double R) {
    const std::size_t n_t = table.t_ladder.size();
    std::vector<std::complex<double>> samples(table.dg.size());
    for (std::size_t idx = 0; idx < table.dg.size(); ++idx) {
        const double phase = table.dg[idx] * xi[0] + table.dv[idx] * xi[1];
        const double t = table.t_ladder[idx % n_t];
        // Y = -(e^{i phase} - 1)/t; |e^{i phase} - 1| <= 2 always
        const std::complex<double> num(std::cos(phase) - 1.0, std::sin(phase));
        samples[idx] = -num / t;
        assert(std::abs(samples[idx]) * t <= 2.0 + 1e-9);
    }
    return ladder_estimate(table.t_ladder, samples, table.n_paths, R);
}

inline EstimatorResult estimate_symbol(const StatePoint& x, const std::array<double, 2>& xi,
                                       const CogarchParams& params, const McSymbolConfig& cfg) {
    const IncrementTable table = simulate_increments(x, params, cfg);
    return estimate_from_increments(table, xi, cfg.R);
}

struct GridEstimate {
    StatePoint x;
    std::array<double, 2> xi{0.0, 0.0};
    EstimatorResult result;
};

// All (start, frequency) pairs; each start simulates its paths once and
// reuses them for every frequency (common random numbers across the grid).
inline std::vector<GridEstimate> estimate_symbol_grid(
    const std::vector<StatePoint>& starts, const std::vector<std::array<double, 2>>& frequencies,
    const CogarchParams& params, const McSymbolConfig& cfg) {
    std::vector<GridEstimate> out;
    out.reserve(starts.size() * frequencies.size());
    for (const StatePoint& x : starts) {
        const IncrementTable table = simulate_increments(x, params, cfg);
        for (const auto& xi : frequencies) {
            GridEstimate ge;
            ge.x = x;
            ge.xi = xi;
            ge.result = estimate_from_increments(table, xi, cfg.R);
            out.push_back(std::move(ge));
        }
    }
    return out;
}

// Exit-time diagnostic over an increment table.
inline ExitSummary exit_summary(const IncrementTable& table) {
    std::vector<std::optional<double>> stops;
    stops.reserve(static_cast<std::size_t>(table.n_paths));
    for (double s : table.stop_time) {
        stops.push_back(std::isnan(s) ? std::nullopt : std::optional<double>(s));
    }
    return exit_time_statistics(stops, table.t_ladder);
}

// ---------------------------------------------------------------------------
// R-independence of the estimate

struct RPairVerdict {
    double R_a = 0.0;
    double R_b = 0.0;
    double diff_re = 0.0;
    double diff_im = 0.0;
    double pooled_se_re = 0.0;
    double pooled_se_im = 0.0;
    bool pass = false;
};

struct RIndependenceReport {
    std::vector<double> radii;
    std::vector<EstimatorResult> estimates;
    std::vector<RPairVerdict> pairs;
    bool all_pass = true;
};

// Re-estimate with each radius (same seed: paths agree until they exit the
// smaller ball) and compare all pairs against 3 pooled standard errors.
// Pooling by sqrt(se_a^2 + se_b^2) ignores the positive common-random-number
// correlation, which only makes the test more conservative.
inline RIndependenceReport r_independence_check(const StatePoint& x,
                                                const std::array<double, 2>& xi,
                                                const CogarchParams& params,
                                                const McSymbolConfig& base_cfg,
                                                const std::vector<double>& radii) {
    if (radii.size() < 2)
        throw std::invalid_argument("r_independence_check: need at least two radii");
    RIndependenceReport report;
    report.radii = radii;
    for (double R : radii) {
        McSymbolConfig cfg = base_cfg;
        cfg.R = R;
        report.estimates.push_back(estimate_symbol(x, xi, params, cfg));
    }
    for (std::size_t a = 0; a < radii.size(); ++a) {
        for (std::size_t b = a + 1; b < radii.size(); ++b) {
            RPairVerdict v;
            v.R_a = radii[a];
            v.R_b = radii[b];
            const auto& ea = report.estimates[a];
            const auto& eb = report.estimates[b];
            v.diff_re = std::abs(ea.estimate.real() - eb.estimate.real());
            v.diff_im = std::abs(ea.estimate.imag() - eb.estimate.imag());
            v.pooled_se_re = std::hypot(ea.stderr_re, eb.stderr_re);
            v.pooled_se_im = std::hypot(ea.stderr_im, eb.stderr_im);
            v.pass = v.diff_re <= 3.0 * v.pooled_se_re && v.diff_im <= 3.0 * v.pooled_se_im;
            report.all_pass = report.all_pass && v.pass;
            report.pairs.push_back(v);
        }
    }
    return report;
}

} // namespace cogarch
