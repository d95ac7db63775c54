#pragma once

// Small-time ladder extrapolation shared by every Monte-Carlo estimator in
// the library.  Raw means at the ladder times t carry an O(t) bias, so the
// reported estimate is the intercept of a weighted least-squares line
// through (t, mean); the weights come from the per-t sample variances.
//
// All ladder times share the same simulated paths (common random numbers),
// which correlates the per-t means.  The intercept standard error is
// therefore computed honestly from the per-path combination
//     Z_i = sum_t c_t Y_i(t)
// with the intercept weights c_t, never from the naive independent-t
// formula.  Real and imaginary parts are treated as two coupled real
// estimators sharing the paths, each with its own weights and stderr.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "summation.hpp"

namespace cogarch {

struct LadderPoint {
    double t = 0.0;
    std::complex<double> mean{0.0, 0.0};
    double se_re = 0.0;
    double se_im = 0.0;
};

struct FitDiagnostics {
    double slope_re = 0.0;
    double slope_im = 0.0;
    double residual_re = 0.0; // RMS of fit residuals over ladder points
    double residual_im = 0.0;
};

struct EstimatorResult {
    std::complex<double> estimate{0.0, 0.0};
    double stderr_re = 0.0;
    double stderr_im = 0.0;
    std::vector<LadderPoint> t_ladder; // sorted descending in t
    double R = 0.0;                    // stopping radius used (0 = none)
    long n_paths = 0;
    FitDiagnostics fit;
    bool extrapolated = false; // false when the ladder has a single rung
};

// Absolute comparison floor for a ladder estimate whose sampled variance
// vanishes.  A component with zero sample variance was measured
// deterministically (e.g. the volatility frequency under a pure-diffusion
// driver), so the only error left is the truncation of the linear ladder
// extrapolation: O(t_max^2) times the curvature of the mean-sample curve
// (1 - e^{i theta(t)})/t, which is bounded by a cubic in the estimate's own
// magnitude.  The constant 25 covers curvature coefficients up to ~80 for
// the default ladder — far above any model this library simulates — while
// staying orders of magnitude below any genuinely statistical tolerance.
// Never apply this floor to components with real sampling noise; their
// standard error is the honest scale.
inline double deterministic_extrapolation_floor(const EstimatorResult& est) {
    const double t_max = est.t_ladder.empty() ? 0.0 : est.t_ladder.front().t;
    const double scale = std::max(1.0, std::abs(est.estimate));
    return 25.0 * t_max * t_max * scale * scale * scale + 1e-12;
}

namespace detail {

struct ComponentStats {
    std::vector<double> mean;
    std::vector<double> var; // sample variance (n-1 denominator)
};

// Per-ladder-time mean and variance of one real component, reduced with
// compensated sums in path order (worker-count independent by design).
inline ComponentStats component_stats(const std::vector<double>& samples, long n_paths,
                                      std::size_t n_t) {
    ComponentStats s;
    s.mean.resize(n_t, 0.0);
    s.var.resize(n_t, 0.0);
    for (std::size_t k = 0; k < n_t; ++k) {
        NeumaierSum acc;
        for (long i = 0; i < n_paths; ++i) acc.add(samples[static_cast<std::size_t>(i) * n_t + k]);
        s.mean[k] = acc.value() / static_cast<double>(n_paths);
        if (n_paths > 1) {
            NeumaierSum sq;
            for (long i = 0; i < n_paths; ++i) {
                const double d = samples[static_cast<std::size_t>(i) * n_t + k] - s.mean[k];
                sq.add(d * d);
            }
            s.var[k] = sq.value() / static_cast<double>(n_paths - 1);
        }
    }
    return s;
}

// Intercept weights c_t of the weighted least-squares line through
// (t_k, y_k) with weights w_k: intercept = sum_k c_k y_k, sum c_k = 1.
inline std::vector<double> intercept_weights(const std::vector<double>& ts,
                                             const std::vector<double>& w) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        s0 += w[k];
        s1 += w[k] * ts[k];
        s2 += w[k] * ts[k] * ts[k];
    }
    const double det = s0 * s2 - s1 * s1;
    std::vector<double> c(ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) c[k] = w[k] * (s2 - s1 * ts[k]) / det;
    return c;
}

inline double fitted_slope(const std::vector<double>& ts, const std::vector<double>& y,
                           const std::vector<double>& w) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, sy = 0.0, sty = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        s0 += w[k];
        s1 += w[k] * ts[k];
        s2 += w[k] * ts[k] * ts[k];
        sy += w[k] * y[k];
        sty += w[k] * ts[k] * y[k];
    }
    const double det = s0 * s2 - s1 * s1;
    return (s0 * sty - s1 * sy) / det;
}

} // namespace detail

// Combine per-path, per-ladder-time samples (path-major layout:
// samples[i * n_t + k] is path i at t_ladder[k]) into the extrapolated
// estimate.  Deterministic in the sample array alone.
inline EstimatorResult ladder_estimate(const std::vector<double>& t_ladder,
                                       const std::vector<std::complex<double>>& samples,
                                       long n_paths, double R) {
    const std::size_t n_t = t_ladder.size();
    if (n_t == 0) throw std::invalid_argument("ladder_estimate: empty t ladder");
    if (n_paths < 1 || samples.size() != static_cast<std::size_t>(n_paths) * n_t)
        throw std::invalid_argument("ladder_estimate: sample layout does not match n_paths * n_t");

    // order the ladder descending in t (reporting convention)
    std::vector<std::size_t> order(n_t);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return t_ladder[a] > t_ladder[b]; });

    std::vector<double> re(samples.size()), im(samples.size());
    for (std::size_t idx = 0; idx < samples.size(); ++idx) {
        re[idx] = samples[idx].real();
        im[idx] = samples[idx].imag();
    }
    const auto stats_re = detail::component_stats(re, n_paths, n_t);
    const auto stats_im = detail::component_stats(im, n_paths, n_t);

    EstimatorResult out;
    out.R = R;
    out.n_paths = n_paths;
    const double n = static_cast<double>(n_paths);
    for (std::size_t k : order) {
        LadderPoint pt;
        pt.t = t_ladder[k];
        pt.mean = {stats_re.mean[k], stats_im.mean[k]};
        pt.se_re = std::sqrt(stats_re.var[k] / n);
        pt.se_im = std::sqrt(stats_im.var[k] / n);
        out.t_ladder.push_back(pt);
    }

    if (n_t == 1) {
        // degenerate ladder: report the raw mean, flagged unextrapolated
        out.estimate = {stats_re.mean[0], stats_im.mean[0]};
        out.stderr_re = std::sqrt(stats_re.var[0] / n);
        out.stderr_im = std::sqrt(stats_im.var[0] / n);
        out.extrapolated = false;
        return out;
    }

    // WLS weights: inverse variance of the per-t mean, floored so an exactly
    // deterministic component (variance zero) degrades to an unweighted fit.
    // Normalized by the largest weight: intercept weights are scale
    // invariant, and raw 1/floor values would overflow the normal equations.
    constexpr double floor = 1e-300;
    std::vector<double> w_re(n_t), w_im(n_t);
    for (std::size_t k = 0; k < n_t; ++k) {
        w_re[k] = 1.0 / (stats_re.var[k] / n + floor);
        w_im[k] = 1.0 / (stats_im.var[k] / n + floor);
    }
    const double wmax_re = *std::max_element(w_re.begin(), w_re.end());
    const double wmax_im = *std::max_element(w_im.begin(), w_im.end());
    for (std::size_t k = 0; k < n_t; ++k) {
        w_re[k] /= wmax_re;
        w_im[k] /= wmax_im;
    }
    const std::vector<double> c_re = detail::intercept_weights(t_ladder, w_re);
    const std::vector<double> c_im = detail::intercept_weights(t_ladder, w_im);

    // per-path intercept combinations -> estimate and honest stderr
    NeumaierSum zsum_re, zsum_im;
    std::vector<double> z_re(static_cast<std::size_t>(n_paths));
    std::vector<double> z_im(static_cast<std::size_t>(n_paths));
    for (long i = 0; i < n_paths; ++i) {
        double zr = 0.0, zi = 0.0;
        for (std::size_t k = 0; k < n_t; ++k) {
            zr += c_re[k] * re[static_cast<std::size_t>(i) * n_t + k];
            zi += c_im[k] * im[static_cast<std::size_t>(i) * n_t + k];
        }
        z_re[static_cast<std::size_t>(i)] = zr;
        z_im[static_cast<std::size_t>(i)] = zi;
        zsum_re.add(zr);
        zsum_im.add(zi);
    }
    const double est_re = zsum_re.value() / n;
    const double est_im = zsum_im.value() / n;
    out.estimate = {est_re, est_im};
    if (n_paths > 1) {
        NeumaierSum var_re, var_im;
        for (long i = 0; i < n_paths; ++i) {
            const double dr = z_re[static_cast<std::size_t>(i)] - est_re;
            const double di = z_im[static_cast<std::size_t>(i)] - est_im;
            var_re.add(dr * dr);
            var_im.add(di * di);
        }
        out.stderr_re = std::sqrt(var_re.value() / (n - 1.0) / n);
        out.stderr_im = std::sqrt(var_im.value() / (n - 1.0) / n);
    }

    out.fit.slope_re = detail::fitted_slope(t_ladder, stats_re.mean, w_re);
    out.fit.slope_im = detail::fitted_slope(t_ladder, stats_im.mean, w_im);
    NeumaierSum res_re, res_im;
    for (std::size_t k = 0; k < n_t; ++k) {
        const double rr = stats_re.mean[k] - (est_re + out.fit.slope_re * t_ladder[k]);
        const double ri = stats_im.mean[k] - (est_im + out.fit.slope_im * t_ladder[k]);
        res_re.add(rr * rr);
        res_im.add(ri * ri);
    }
    out.fit.residual_re = std::sqrt(res_re.value() / static_cast<double>(n_t));
    out.fit.residual_im = std::sqrt(res_im.value() / static_cast<double>(n_t));
    out.extrapolated = true;
    return out;
}

} // namespace cogarch
