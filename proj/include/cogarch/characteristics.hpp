#pragma once

// Semimartingale characteristics (B, C, nu) of the COGARCH pair, in
// differential form
//
//   B_t = \int_0^t ( b_1(X_s), b_2(X_s) ) ds            (|z|<1-box truncation)
//   C_t = \int_0^t diag( e^{X_s^{(2)}} Q, 0 ) ds        (V has no Brownian part)
//   nu(ds, dz) = image-measure(X_s, dz) ds
//
// with the same b_1, b_2 and image measure as the symbol (shared code), and
// empirical verification of all three against simulated paths:
//   (i)   mean truncated increment vs E B_t,
//   (ii)  quadratic variation of the continuous part vs E C_t (paired,
//         exactly zero-mean by construction), and
//   (iii) jump counts in rectangles vs the integrated compensator.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cogarch.hpp"
#include "parallel.hpp"
#include "summation.hpp"
#include "symbol.hpp"

namespace cogarch {

struct DifferentialCharacteristics {
    std::array<double, 2> drift{0.0, 0.0};                    // (b_1, b_2) at x
    std::array<std::array<double, 2>, 2> diffusion{{{0.0, 0.0}, {0.0, 0.0}}};
    ImageMeasureSpec jump_measure;                            // image measure at x
    double quadrature_error = 0.0;
};

inline DifferentialCharacteristics differential_characteristics(const StatePoint& x,
                                                                const CogarchParams& params,
                                                                const QuadratureOptions& opts = {}) {
    const DriftCoefficients d = drift_coefficients(x.v, params, opts);
    DifferentialCharacteristics out;
    out.drift = {d.b1, d.b2};
    out.diffusion[0][0] = std::exp(x.v) * params.driver.gaussian;
    out.jump_measure = ImageMeasureSpec{params.driver.measure, x.v, feedback_ratio(params)};
    out.quadrature_error = d.quadrature_error;
    return out;
}

// Integrated drift and diffusion characteristics along a simulated path
// grid, by trapezoid.  The pre/post duplicate entries a SamplePath carries
// at jump times contribute zero-width intervals, so the trapezoid is
// correct across jumps.
struct CharacteristicsPath {
    std::vector<double> times;
    std::vector<double> B1;
    std::vector<double> B2;
    std::vector<double> C11;
};

inline CharacteristicsPath integrate_characteristics(const SamplePath& path,
                                                     const CogarchParams& params,
                                                     const QuadratureOptions& opts = {}) {
    CharacteristicsPath out;
    const std::size_t n = path.grid_times.size();
    out.times = path.grid_times;
    out.B1.resize(n, 0.0);
    out.B2.resize(n, 0.0);
    out.C11.resize(n, 0.0);
    if (n == 0) return out;

    double prev_b1 = 0.0, prev_b2 = 0.0, prev_c = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const DriftCoefficients d = drift_coefficients(path.states[k].v, params, opts);
        const double c11 = std::exp(path.states[k].v) * params.driver.gaussian;
        if (k > 0) {
            const double dt = path.grid_times[k] - path.grid_times[k - 1];
            out.B1[k] = out.B1[k - 1] + 0.5 * (prev_b1 + d.b1) * dt;
            out.B2[k] = out.B2[k - 1] + 0.5 * (prev_b2 + d.b2) * dt;
            out.C11[k] = out.C11[k - 1] + 0.5 * (prev_c + c11) * dt;
        }
        prev_b1 = d.b1;
        prev_b2 = d.b2;
        prev_c = c11;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Jump-compensator test sets

// Closed axis-aligned rectangle in the state-jump space z = (dG, dV).
struct Rectangle {
    double z1_lo = 0.0, z1_hi = 0.0;
    double z2_lo = 0.0, z2_hi = 0.0;

    bool contains(double z1, double z2) const noexcept {
        return z1 >= z1_lo && z1 <= z1_hi && z2 >= z2_lo && z2 <= z2_hi;
    }
};

// Test rectangles must keep away from the origin (the jump measure may have
// infinite mass there) and from the truncation boundary |z_i| = 1 by a
// 1e-6 margin (finite samples cannot resolve an indicator edge).
inline void validate_rectangle(const Rectangle& r) {
    if (!(r.z1_lo <= r.z1_hi && r.z2_lo <= r.z2_hi))
        throw std::invalid_argument("rectangle: lo must not exceed hi");
    const bool contains_origin =
        r.z1_lo <= 0.0 && 0.0 <= r.z1_hi && r.z2_lo <= 0.0 && 0.0 <= r.z2_hi;
    if (contains_origin)
        throw std::invalid_argument("rectangle: must have positive distance from the origin");
    constexpr double margin = 1e-6;
    for (double edge : {r.z1_lo, r.z1_hi, r.z2_lo, r.z2_hi}) {
        if (std::abs(std::abs(edge) - 1.0) < margin)
            throw std::invalid_argument(
                "rectangle: edges must stay 1e-6 away from the truncation boundary |z| = 1");
    }
}

// Mass the image measure at log-volatility v puts on the rectangle:
// exact indicator sum for atoms; for densities, integration over the
// pre-image intervals of the rectangle under f_v.
inline double image_mass_in_rectangle(const ImageMeasureSpec& spec, const Rectangle& rect,
                                      const QuadratureOptions& opts = {}) {
    auto mapped_inside = [&](double w) {
        const std::array<double, 2> z = f_v(w, spec.v, spec.feedback_ratio);
        return rect.contains(z[0], z[1]);
    };
    if (const auto* atomic = std::get_if<AtomicMeasure>(&spec.base)) {
        NeumaierSum acc;
        for (const Atom& a : atomic->atoms) {
            if (mapped_inside(a.size)) acc.add(a.rate);
        }
        return acc.value();
    }
    // density: the pre-image of the rectangle is the intersection of
    //   w in [z1_lo, z1_hi] * e^{-v/2}            (first component)
    //   |w| in [w_lo, w_hi] from the z2 window    (second component)
    const auto& d = std::get<DensityMeasure>(spec.base);
    const double scale = std::exp(-spec.v / 2.0);
    const double a1 = rect.z1_lo * scale;
    const double b1 = rect.z1_hi * scale;

    double w_lo = 0.0;
    double w_hi = std::numeric_limits<double>::infinity();
    if (spec.feedback_ratio > 0.0) {
        if (rect.z2_hi < 0.0) return 0.0; // z2 >= 0 always
        w_hi = std::sqrt(std::expm1(rect.z2_hi) / spec.feedback_ratio);
        w_lo = rect.z2_lo <= 0.0
                   ? 0.0
                   : std::sqrt(std::expm1(rect.z2_lo) / spec.feedback_ratio);
    } else {
        // z2 is identically 0: the z2 window either accepts everything or nothing
        if (!(rect.z2_lo <= 0.0 && 0.0 <= rect.z2_hi)) return 0.0;
    }

    double mass = 0.0;
    // positive-w branch: w in [max(a1, w_lo), min(b1, w_hi)] clipped to support
    {
        const double lo = std::max({a1, w_lo, 0.0});
        const double hi = std::min({b1, w_hi, d.y_max});
        if (hi > lo && hi > 0.0)
            mass += integrate_adaptive(d.density, std::max(lo, 1e-300), hi, {}, opts).value;
    }
    // negative-w branch: w in [max(a1, -w_hi), min(b1, -w_lo)]
    {
        const double lo = std::max({a1, -w_hi, d.y_min});
        const double hi = std::min({b1, -w_lo, 0.0});
        if (hi > lo && lo < 0.0)
            mass += integrate_adaptive(d.density, lo, std::min(hi, -1e-300), {}, opts).value;
    }
    return mass;
}

// ---------------------------------------------------------------------------
// Empirical verification report

struct MeanCheck {
    double mean_diff = 0.0; // empirical minus predicted, paired per path
    double stderr_mean = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct RectangleCheck {
    Rectangle rect;
    double mean_count = 0.0;
    double mean_compensator = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct CharacteristicsCheckReport {
    MeanCheck drift_g;   // component 1 of (i)
    MeanCheck drift_v;   // component 2 of (i)
    MeanCheck qv;        // (ii)
    std::vector<RectangleCheck> rectangles; // (iii)
    long n_paths = 0;
    bool pass = false;
};

struct CharacteristicsCheckConfig {
    double t = 1.0;
    long n_paths = 10000;
    std::uint64_t seed = 1;
    int workers = 0;
    double step = 0.005;
    double jump_cutoff = 1e-3;
};

// Simulate n_paths paths and test the three characteristics against their
// empirical counterparts; (i) and (ii) at 4 standard errors of the paired
// per-path difference, (iii) at 4 Poisson standard errors.
inline CharacteristicsCheckReport empirical_characteristics_check(
    const CogarchParams& params, const StatePoint& start,
    const std::vector<Rectangle>& rectangles, const CharacteristicsCheckConfig& cfg,
    const QuadratureOptions& opts = {}) {
    validate(params);
    for (const Rectangle& r : rectangles) validate_rectangle(r);
    if (cfg.n_paths < 2)
        throw std::invalid_argument("characteristics check: need at least 2 paths");

    const std::size_t n_rect = rectangles.size();
    const std::size_t n = static_cast<std::size_t>(cfg.n_paths);
    std::vector<double> diff_g(n), diff_v(n), diff_qv(n);
    std::vector<double> counts(n * std::max<std::size_t>(n_rect, 1), 0.0);
    std::vector<double> comps(n * std::max<std::size_t>(n_rect, 1), 0.0);

    const double drift_eff = effective_drift(params.driver, cfg.jump_cutoff);
    const double Q = params.driver.gaussian;

    // Density drivers never generate jumps with |w| below the simulation
    // cutoff, but the predicted drift b_2 integrates log1p(ratio w^2) over
    // all w.  The dropped part is a deterministic rate (z_2 does not depend
    // on the state, and such tiny jumps always land inside the truncation
    // box), so the pairing subtracts it explicitly.  The G-component needs
    // no correction: dropped jumps are inside the box, where the effective
    // simulation drift already compensates them exactly.
    double dropped_v_rate = 0.0;
    if (const auto* dens = std::get_if<DensityMeasure>(&params.driver.measure)) {
        const double ratio = feedback_ratio(params);
        if (ratio > 0.0) {
            auto z2 = [&](double w) { return log_volatility_jump(w, ratio); };
            dropped_v_rate +=
                detail::integrate_density_side<decltype(z2), double>(
                    *dens, z2, +1.0, std::min(cfg.jump_cutoff, dens->y_max), {}, opts)
                    .value;
            dropped_v_rate +=
                detail::integrate_density_side<decltype(z2), double>(
                    *dens, z2, -1.0, std::min(cfg.jump_cutoff, -dens->y_min), {}, opts)
                    .value;
        }
    }

    parallel_for_chunks(cfg.n_paths, cfg.workers, [&](long begin, long end) {
        struct CheckObserver {
            const CogarchParams* params;
            const QuadratureOptions* opts;
            const std::vector<Rectangle>* rects;
            double drift_eff = 0.0, Q = 0.0;
            StatePoint start{};

            // trapezoid state for \int b ds, \int e^V Q ds, \int mass ds
            bool have_prev = false;
            double prev_t = 0.0, prev_b1 = 0.0, prev_b2 = 0.0, prev_c = 0.0;
            std::vector<double> prev_mass;
            double int_b1 = 0.0, int_b2 = 0.0, int_c = 0.0;
            std::vector<double> int_mass;

            // accumulated per-path statistics
            double qv_minus_c = 0.0;        // sum of gauss^2 - Q I2 (zero-mean pairing)
            double untrunc_g = 0.0, untrunc_v = 0.0; // jumps outside the unit box
            std::vector<double> jump_counts;
            StatePoint last{};

            void init(std::size_t n_rect) {
                prev_mass.assign(n_rect, 0.0);
                int_mass.assign(n_rect, 0.0);
                jump_counts.assign(n_rect, 0.0);
            }

            void on_state(double time, const StatePoint& s) {
                const DriftCoefficients d = drift_coefficients(s.v, *params, *opts);
                const double c11 = std::exp(s.v) * Q;
                std::vector<double> mass(rects->size());
                ImageMeasureSpec spec{params->driver.measure, s.v, feedback_ratio(*params)};
                for (std::size_t r = 0; r < rects->size(); ++r) {
                    mass[r] = image_mass_in_rectangle(spec, (*rects)[r], *opts);
                }
                if (have_prev) {
                    const double dt = time - prev_t;
                    int_b1 += 0.5 * (prev_b1 + d.b1) * dt;
                    int_b2 += 0.5 * (prev_b2 + d.b2) * dt;
                    int_c += 0.5 * (prev_c + c11) * dt;
                    for (std::size_t r = 0; r < mass.size(); ++r)
                        int_mass[r] += 0.5 * (prev_mass[r] + mass[r]) * dt;
                }
                prev_t = time;
                prev_b1 = d.b1;
                prev_b2 = d.b2;
                prev_c = c11;
                prev_mass = std::move(mass);
                have_prev = true;
                last = s;
            }

            void on_interval(double, double, double, double sig_int, double var_int,
                             double dg_cont) {
                const double gauss = dg_cont - drift_eff * sig_int;
                qv_minus_c += gauss * gauss - Q * var_int;
            }

            void on_jump(const JumpRecord& rec) {
                const bool truncated = std::abs(rec.dg) < 1.0 && std::abs(rec.dv) < 1.0;
                if (!truncated) {
                    untrunc_g += rec.dg;
                    untrunc_v += rec.dv;
                }
                for (std::size_t r = 0; r < rects->size(); ++r) {
                    if ((*rects)[r].contains(rec.dg, rec.dv)) jump_counts[r] += 1.0;
                }
            }
        };

        PathEngineConfig engine;
        engine.t_max = cfg.t;
        engine.step = cfg.step;
        engine.jump_cutoff = cfg.jump_cutoff;

        for (long i = begin; i < end; ++i) {
            CheckObserver obs;
            obs.params = &params;
            obs.opts = &opts;
            obs.rects = &rectangles;
            obs.drift_eff = drift_eff;
            obs.Q = Q;
            obs.start = start;
            obs.init(n_rect);
            drive_path(start, params, engine, derive_stream(cfg.seed, static_cast<std::uint64_t>(i)),
                       obs);
            const std::size_t ui = static_cast<std::size_t>(i);
            diff_g[ui] = (obs.last.g - start.g) - obs.untrunc_g - obs.int_b1;
            diff_v[ui] = (obs.last.v - start.v) - obs.untrunc_v - obs.int_b2 +
                         cfg.t * dropped_v_rate;
            diff_qv[ui] = obs.qv_minus_c;
            for (std::size_t r = 0; r < n_rect; ++r) {
                counts[ui * std::max<std::size_t>(n_rect, 1) + r] = obs.jump_counts[r];
                comps[ui * std::max<std::size_t>(n_rect, 1) + r] = obs.int_mass[r];
            }
        }
    });

    auto mean_and_se = [&](const std::vector<double>& xs) {
        NeumaierSum acc;
        for (double x : xs) acc.add(x);
        const double mean = acc.value() / static_cast<double>(xs.size());
        NeumaierSum sq;
        for (double x : xs) {
            const double d = x - mean;
            sq.add(d * d);
        }
        const double se = xs.size() > 1
                              ? std::sqrt(sq.value() / static_cast<double>(xs.size() - 1) /
                                          static_cast<double>(xs.size()))
                              : 0.0;
        return std::pair<double, double>(mean, se);
    };

    CharacteristicsCheckReport report;
    report.n_paths = cfg.n_paths;

    auto fill_check = [&](const std::vector<double>& diffs, double bias_floor) {
        MeanCheck c;
        auto [mean, se] = mean_and_se(diffs);
        c.mean_diff = mean;
        c.stderr_mean = se;
        c.tolerance = 4.0 * se + bias_floor;
        c.pass = std::abs(mean) <= c.tolerance;
        return c;
    };
    // The drift pairing subtracts a trapezoid \int b ds from a path integral
    // computed with Simpson sub-steps, so it carries an O(step^2 t)
    // deterministic discretization bias that a zero-variance (deterministic)
    // model would turn into a guaranteed failure at a pure 4 se tolerance.
    // The floor bounds that bias for coefficient curvatures up to O(10).
    // The quadratic-variation pairing is exact by construction (the Gaussian
    // increment is generated from the same variance integral it is compared
    // against) and keeps the pure statistical tolerance.
    const double trapezoid_floor = 25.0 * cfg.step * cfg.step * cfg.t;
    report.drift_g = fill_check(diff_g, trapezoid_floor);
    report.drift_v = fill_check(diff_v, trapezoid_floor);
    report.qv = fill_check(diff_qv, 0.0);

    bool all = report.drift_g.pass && report.drift_v.pass && report.qv.pass;
    for (std::size_t r = 0; r < n_rect; ++r) {
        RectangleCheck rc;
        rc.rect = rectangles[r];
        NeumaierSum csum, psum;
        for (std::size_t i = 0; i < n; ++i) {
            csum.add(counts[i * n_rect + r]);
            psum.add(comps[i * n_rect + r]);
        }
        rc.mean_count = csum.value() / static_cast<double>(n);
        rc.mean_compensator = psum.value() / static_cast<double>(n);
        // Poisson standard error of the mean count, with the compensator as
        // fallback intensity when no jump was observed at all
        const double intensity = std::max(rc.mean_count, rc.mean_compensator);
        rc.tolerance = 4.0 * std::sqrt(intensity / static_cast<double>(n));
        rc.pass = std::abs(rc.mean_count - rc.mean_compensator) <= rc.tolerance;
        all = all && rc.pass;
        report.rectangles.push_back(rc);
    }
    report.pass = all;
    return report;
}

} // namespace cogarch
