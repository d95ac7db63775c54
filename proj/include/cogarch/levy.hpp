#pragma once

// Scalar Lévy processes described by their characteristic triplet
// (drift, gaussian variance, jump measure), with
//   - evaluation of the characteristic exponent
//       psi(xi) = -i l xi + (1/2) Q xi^2
//                 - \int (e^{i y xi} - 1 - i y xi 1_{|y|<1}) N(dy),
//   - quadrature of arbitrary integrands against the jump measure, and
//   - sampling of compound-Poisson path skeletons (jump times and sizes)
//     for simulation.
//
// The truncation function is fixed library-wide to the indicator of the
// open interval |y| < 1 (strict inequality: a jump of size exactly 1 is
// not compensated).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "quadrature.hpp"
#include "rng.hpp"
#include "summation.hpp"

namespace cogarch {

// ---------------------------------------------------------------------------
// Jump-measure representations

struct Atom {
    double size = 0.0; // jump height, nonzero
    double rate = 0.0; // expected jumps per unit time, strictly positive
};

// Finite sum of weighted Dirac atoms; an empty atom list is the zero
// measure (no jumps).
struct AtomicMeasure {
    std::vector<Atom> atoms;
};

// Absolutely continuous measure N(dy) = density(y) dy supported on
// [y_min, 0) u (0, y_max].  Near zero the density may blow up like
// |y|^{-1-alpha}; alpha steers the substitution used by the quadrature.
struct DensityMeasure {
    std::function<double(double)> density;
    double small_jump_exponent = 0.0; // alpha in [0, 2)
    double y_min = -1.0;              // lower support cutoff, < 0
    double y_max = 1.0;               // upper support cutoff, > 0
};

using LevyMeasure = std::variant<AtomicMeasure, DensityMeasure>;

struct LevyTriplet {
    double drift = 0.0;    // l, under the |y| < 1 truncation convention
    double gaussian = 0.0; // Q >= 0, variance coefficient
    LevyMeasure measure = AtomicMeasure{};
};

inline void validate(const LevyMeasure& measure) {
    if (const auto* atomic = std::get_if<AtomicMeasure>(&measure)) {
        for (const Atom& a : atomic->atoms) {
            if (!(a.rate > 0.0))
                throw std::invalid_argument("levy measure: atom rate must be > 0 (got " +
                                            std::to_string(a.rate) + ")");
            if (a.size == 0.0 || !std::isfinite(a.size))
                throw std::invalid_argument("levy measure: atom size must be nonzero and finite");
        }
        return;
    }
    const auto& d = std::get<DensityMeasure>(measure);
    if (!d.density) throw std::invalid_argument("levy measure: density callable is empty");
    if (!(d.small_jump_exponent >= 0.0 && d.small_jump_exponent < 2.0))
        throw std::invalid_argument("levy measure: small-jump exponent must lie in [0, 2)");
    if (!(d.y_min < 0.0 && d.y_max > 0.0))
        throw std::invalid_argument("levy measure: support cutoffs must satisfy y_min < 0 < y_max");
}

inline void validate(const LevyTriplet& triplet) {
    if (!(triplet.gaussian >= 0.0))
        throw std::invalid_argument("levy triplet: gaussian coefficient must be >= 0");
    if (!std::isfinite(triplet.drift))
        throw std::invalid_argument("levy triplet: drift must be finite");
    validate(triplet.measure);
}

inline bool is_zero_measure(const LevyMeasure& measure) {
    const auto* atomic = std::get_if<AtomicMeasure>(&measure);
    return atomic != nullptr && atomic->atoms.empty();
}

// ---------------------------------------------------------------------------
// Integration against the jump measure

namespace detail {

// Smallest |y| kept by the density quadrature.  Integrands are O(y^2) near
// zero while the density is O(|y|^{-1-alpha}), so the discarded mass below
// y_floor is O(y_floor^{2-alpha}) ~ 1e-15 relative to the integrand scale.
inline double density_floor(double alpha) {
    return std::pow(10.0, -15.0 / (2.0 - alpha));
}

// e^{it} - 1, with the real part in the subtraction-free form -2 sin^2(t/2).
inline std::complex<double> expi_m1(double t) noexcept {
    const double s = std::sin(0.5 * t);
    return {-2.0 * s * s, std::sin(t)};
}

// e^{it} - 1 - it.  Both components are O(t^2); forming them by literal
// subtraction leaves only noise once |t| is near sqrt(eps), and densities
// with infinite activity amplify that noise by |y|^{-1-alpha}.  The real
// part is exact as -2 sin^2(t/2); the imaginary part sin(t) - t switches to
// its Taylor series for small |t| (truncation below 1e-16 at |t| = 0.5).
inline std::complex<double> expi_m1_m_it(double t) noexcept {
    const double s = std::sin(0.5 * t);
    const double re = -2.0 * s * s;
    const double t2 = t * t;
    double im;
    if (std::abs(t) < 0.5) {
        im = -t * t2 *
             (1.0 / 6.0 -
              t2 * (1.0 / 120.0 -
                    t2 * (1.0 / 5040.0 -
                          t2 * (1.0 / 362880.0 -
                                t2 * (1.0 / 39916800.0 - t2 / 6227020800.0)))));
    } else {
        im = std::sin(t) - t;
    }
    return {re, im};
}

// One side of the support under the substitution y = sign * e^u, which
// absorbs the |y|^{-1-alpha} singularity: the transformed integrand decays
// like e^{(2-alpha) u} as u -> -inf.
template <class F, class T>
QuadratureResult<T> integrate_density_side(const DensityMeasure& measure, F& f, double sign,
                                           double y_far, const std::vector<double>& breakpoints,
                                           const QuadratureOptions& opts) {
    const double y_near = density_floor(measure.small_jump_exponent);
    if (!(y_far > y_near)) return {};
    const double u_lo = std::log(y_near);
    const double u_hi = std::log(y_far);

    std::vector<double> u_breaks;
    for (double b : breakpoints) {
        const double yb = sign * b; // breakpoints are given in y-space
        if (yb > y_near && yb < y_far) u_breaks.push_back(std::log(yb));
    }

    auto g = [&](double u) -> T {
        const double y = sign * std::exp(u);
        return static_cast<T>(f(y) * measure.density(y) * std::abs(y));
    };
    return integrate_adaptive(g, u_lo, u_hi, u_breaks, opts);
}

} // namespace detail

// Integral of f against the jump measure.  For atomic measures the result
// is an exact (compensated) finite sum; for densities it is adaptive
// quadrature with y = +-e^u substitution near zero.  `breakpoints` lists
// y-values where f is non-smooth (indicator edges); f must be integrable
// against N, in particular O(y^2) as y -> 0 when the measure has infinite
// activity.
template <class F>
auto integrate_levy(const LevyMeasure& measure, F&& f,
                    const std::vector<double>& breakpoints = {},
                    const QuadratureOptions& opts = {})
    -> QuadratureResult<std::invoke_result_t<F&, double>> {
    using T = std::invoke_result_t<F&, double>;

    if (const auto* atomic = std::get_if<AtomicMeasure>(&measure)) {
        QuadratureResult<T> out;
        if constexpr (std::is_same_v<T, std::complex<double>>) {
            NeumaierSumComplex acc;
            for (const Atom& a : atomic->atoms) acc.add(a.rate * f(a.size));
            out.value = acc.value();
        } else {
            NeumaierSum acc;
            for (const Atom& a : atomic->atoms) acc.add(a.rate * f(a.size));
            out.value = acc.value();
        }
        return out;
    }

    const auto& dens = std::get<DensityMeasure>(measure);
    auto pos = detail::integrate_density_side<F, T>(dens, f, +1.0, dens.y_max, breakpoints, opts);
    auto neg = detail::integrate_density_side<F, T>(dens, f, -1.0, -dens.y_min, breakpoints, opts);
    QuadratureResult<T> out;
    out.value = pos.value + neg.value;
    out.error_estimate = pos.error_estimate + neg.error_estimate;
    out.panels = pos.panels + neg.panels;
    return out;
}

// Numerical check of the defining integrability condition
// \int (1 ^ y^2) N(dy) < infinity; throws if it fails.
inline void validate_integrability(const LevyMeasure& measure, const QuadratureOptions& opts = {}) {
    auto integrand = [](double y) { return std::min(1.0, y * y); };
    auto r = integrate_levy(measure, integrand, {-1.0, 1.0}, opts);
    if (!std::isfinite(r.value) || r.value < 0.0)
        throw std::invalid_argument("levy measure: integral of (1 ^ y^2) is not finite");
}

// Mass of {|y| >= eps}.  Atomic measures have finite activity and are never
// truncated: the full rate is returned regardless of eps.
inline double truncated_mass(const LevyMeasure& measure, double eps,
                             const QuadratureOptions& opts = {}) {
    if (const auto* atomic = std::get_if<AtomicMeasure>(&measure)) {
        NeumaierSum acc;
        for (const Atom& a : atomic->atoms) acc.add(a.rate);
        return acc.value();
    }
    if (!(eps > 0.0)) throw std::invalid_argument("truncated_mass: eps must be > 0 for densities");
    const auto& d = std::get<DensityMeasure>(measure);
    double mass = 0.0;
    if (d.y_max > eps) mass += integrate_adaptive(d.density, eps, d.y_max, {}, opts).value;
    if (-d.y_min > eps) mass += integrate_adaptive(d.density, d.y_min, -eps, {}, opts).value;
    if (!std::isfinite(mass))
        throw std::invalid_argument("truncated_mass: infinite rate — eps too small for this density");
    return mass;
}

// Mean of the simulated-but-compensated region:
//   atomic:  sum of size * rate over atoms with |size| < 1   (all atoms are simulated)
//   density: \int_{eps <= |y| < 1} y N(dy)                   (jumps below eps are dropped)
// Simulated skeletons carry these jumps uncompensated, so the drift used in
// simulation must subtract this mean to stay consistent with the triplet's
// |y| < 1 truncation convention; see effective_drift below.
inline double compensated_jump_mean(const LevyMeasure& measure, double eps,
                                    const QuadratureOptions& opts = {}) {
    if (const auto* atomic = std::get_if<AtomicMeasure>(&measure)) {
        NeumaierSum acc;
        for (const Atom& a : atomic->atoms) {
            if (std::abs(a.size) < 1.0) acc.add(a.size * a.rate);
        }
        return acc.value();
    }
    const auto& d = std::get<DensityMeasure>(measure);
    if (!(eps > 0.0))
        throw std::invalid_argument("compensated_jump_mean: eps must be > 0 for densities");
    auto integrand = [&](double y) { return y * d.density(y); };
    double mean = 0.0;
    if (std::min(1.0, d.y_max) > eps)
        mean += integrate_adaptive(integrand, eps, std::min(1.0, d.y_max), {}, opts).value;
    if (std::min(1.0, -d.y_min) > eps)
        mean += integrate_adaptive(integrand, -std::min(1.0, -d.y_min), -eps, {}, opts).value;
    return mean;
}

// Drift of the compound-Poisson-plus-diffusion skeleton that reproduces the
// triplet's law: the skeleton adds jumps raw (uncompensated), so the |y|<1
// part that the triplet's drift convention assumes compensated has to be
// subtracted here.
inline double effective_drift(const LevyTriplet& triplet, double eps,
                              const QuadratureOptions& opts = {}) {
    return triplet.drift - compensated_jump_mean(triplet.measure, eps, opts);
}

// ---------------------------------------------------------------------------
// Characteristic exponent

inline std::complex<double> characteristic_exponent(const LevyTriplet& triplet, double xi,
                                                    const QuadratureOptions& opts = {}) {
    const std::complex<double> i(0.0, 1.0);
    std::complex<double> psi = -i * triplet.drift * xi + 0.5 * triplet.gaussian * xi * xi;
    if (!is_zero_measure(triplet.measure)) {
        auto integrand = [xi](double y) -> std::complex<double> {
            const double t = y * xi;
            return (std::abs(y) < 1.0) ? detail::expi_m1_m_it(t) : detail::expi_m1(t);
        };
        psi -= integrate_levy(triplet.measure, integrand, {-1.0, 1.0}, opts).value;
    }
    return psi;
}

// The symbol of the Lévy process itself: state-independent, equal to the
// characteristic exponent at every starting point x.  Exposed as its own
// operation so the space-homogeneity identity is directly testable.
inline std::complex<double> levy_symbol(const LevyTriplet& triplet,
                                        const std::vector<double>& /*x*/, double xi,
                                        const QuadratureOptions& opts = {}) {
    return characteristic_exponent(triplet, xi, opts);
}

// ---------------------------------------------------------------------------
// Skeleton sampling

struct PathSkeleton {
    std::vector<double> jump_times; // strictly increasing, in (0, t_max]
    std::vector<double> jump_sizes; // same length, all nonzero
    double t_max = 0.0;
    std::uint64_t seed = 0;
};

// Prepared sampler for jump sizes of the eps-truncated measure.  Atomic
// measures sample exactly from the normalized rates; densities sample from
// an inverse-CDF table on a log-spaced grid (512 panels per support side),
// accurate to the table resolution.
class JumpSampler {
  public:
    JumpSampler(const LevyMeasure& measure, double eps, const QuadratureOptions& opts = {}) {
        if (const auto* atomic = std::get_if<AtomicMeasure>(&measure)) {
            double cum = 0.0;
            for (const Atom& a : atomic->atoms) {
                cum += a.rate;
                cumulative_.push_back(cum);
                panel_lo_.push_back(a.size);
                panel_hi_.push_back(a.size);
            }
            total_rate_ = cum;
            table_based_ = false;
            return;
        }
        const auto& d = std::get<DensityMeasure>(measure);
        if (!(eps > 0.0))
            throw std::invalid_argument("jump sampler: eps must be > 0 for density measures");
        table_based_ = true;
        build_side(d, eps, d.y_max, +1.0, opts);
        build_side(d, eps, -d.y_min, -1.0, opts);
        if (!std::isfinite(total_rate_))
            throw std::invalid_argument("jump sampler: infinite truncated rate — eps too small");
    }

    double total_rate() const noexcept { return total_rate_; }

    double sample_size(SplitMix64& rng) const {
        const double target = rng.uniform01() * total_rate_;
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
        const std::size_t k =
            std::min<std::size_t>(it - cumulative_.begin(), cumulative_.size() - 1);
        if (!table_based_) return panel_lo_[k];
        // linear interpolation of the inverse CDF inside panel k
        const double lo_mass = (k == 0) ? 0.0 : cumulative_[k - 1];
        const double panel_mass = cumulative_[k] - lo_mass;
        const double frac = (panel_mass > 0.0) ? (target - lo_mass) / panel_mass : 0.5;
        return panel_lo_[k] + frac * (panel_hi_[k] - panel_lo_[k]);
    }

  private:
    void build_side(const DensityMeasure& d, double eps, double far, double sign,
                    const QuadratureOptions& opts) {
        if (!(far > eps)) return;
        constexpr int panels = 512;
        const double u_lo = std::log(eps);
        const double u_hi = std::log(far);
        double knot = sign * eps;
        for (int j = 0; j < panels; ++j) {
            const double u_next = u_lo + (u_hi - u_lo) * (j + 1) / panels;
            const double next = sign * std::exp(u_next);
            const double mass =
                integrate_adaptive(d.density, std::min(knot, next), std::max(knot, next), {}, opts)
                    .value;
            total_rate_ += mass;
            cumulative_.push_back(total_rate_);
            panel_lo_.push_back(knot);
            panel_hi_.push_back(next);
            knot = next;
        }
    }

    bool table_based_ = false;
    double total_rate_ = 0.0;
    std::vector<double> cumulative_;
    std::vector<double> panel_lo_;
    std::vector<double> panel_hi_;
};

// Draw the jump times and sizes of the eps-truncated measure on (0, t_max]
// as a marked Poisson process; deterministic function of the seed.  eps is
// ignored for atomic measures (finite activity).
inline PathSkeleton sample_skeleton(const LevyTriplet& triplet, double t_max, double eps,
                                    std::uint64_t seed, const QuadratureOptions& opts = {}) {
    if (!(t_max > 0.0)) throw std::invalid_argument("sample_skeleton: t_max must be > 0");
    PathSkeleton skel;
    skel.t_max = t_max;
    skel.seed = seed;
    if (is_zero_measure(triplet.measure)) return skel;

    JumpSampler sampler(triplet.measure, eps, opts);
    const double rate = sampler.total_rate();
    if (rate <= 0.0) return skel;

    SplitMix64 rng(seed);
    double t = 0.0;
    for (;;) {
        t += rng.exponential(rate);
        if (t > t_max) break;
        skel.jump_times.push_back(t);
        skel.jump_sizes.push_back(sampler.sample_size(rng));
    }
    return skel;
}

// One sample of Z_t from the eps-truncated skeleton plus diffusion and
// effective drift; used by the sampler-consistency checks.
inline double sample_increment(const LevyTriplet& triplet, double t, double eps,
                               std::uint64_t seed, const QuadratureOptions& opts = {}) {
    const double drift = effective_drift(triplet, eps, opts);
    PathSkeleton skel = sample_skeleton(triplet, t, eps, derive_stream(seed, 0), opts);
    SplitMix64 rng(derive_stream(seed, 1));
    double z = drift * t;
    if (triplet.gaussian > 0.0) z += std::sqrt(triplet.gaussian * t) * rng.normal();
    NeumaierSum jumps;
    for (double s : skel.jump_sizes) jumps.add(s);
    return z + jumps.value();
}

} // namespace cogarch
