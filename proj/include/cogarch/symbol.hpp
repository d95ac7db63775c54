#pragma once

// Closed-form state-dependent symbol of the COGARCH pair X = (G, V) and the
// image-measure machinery behind it.
//
// A driver jump of size w moves the state by the vector
//
//   f_v(w) = ( e^{v/2} w,  log(1 + (lambda/delta) w^2) ),
//
// so the state-space jump measure is the pushforward (image) of the driver
// measure N under f_v.  It is never materialized: every integral against it
// is computed by pullback, \int h(f_v(w)) N(dw), which is exact for atomic N.
//
// The symbol itself is
//
//   p(x, xi) = -i xi_1 [ l e^{v/2}
//                        + e^{v/2} \int y (1_{|e^{v/2}y|<1} 1_{|z_2(y)|<1}
//                                          - 1_{|y|<1}) N(dy) ]
//              -i xi_2 [ beta e^{-v} + log(delta)
//                        + \int z_2(y) 1_{|e^{v/2}y|<1} 1_{|z_2(y)|<1} N(dy) ]
//              + (1/2) xi_1^2 e^{v} Q
//              - \int ( e^{i z.xi} - 1 - i z.xi 1_{|z_1|<1} 1_{|z_2|<1} )
//                     image-measure(x, dz)
//
// with z_2(y) = log(1 + (lambda/delta) y^2).  It depends on x only through
// v; the first component g never enters.  All indicators are strict (open
// intervals): a jump landing exactly on a truncation boundary counts as
// outside.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cogarch.hpp"
#include "levy.hpp"
#include "quadrature.hpp"

namespace cogarch {

struct SymbolValue {
    std::complex<double> value{0.0, 0.0};
    double quadrature_error = 0.0; // estimated absolute error of the measure integrals
};

// The state-space jump measure at log-volatility v: pushforward of `base`
// under f_v with the given feedback ratio lambda/delta.
struct ImageMeasureSpec {
    LevyMeasure base;
    double v = 0.0;
    double feedback_ratio = 0.0;
};

// Jump map of the state space.
inline std::array<double, 2> f_v(double w, double v, double feedback_ratio) {
    return {std::exp(v / 2.0) * w, log_volatility_jump(w, feedback_ratio)};
}

inline std::array<double, 2> f_v(double w, double v, const CogarchParams& params) {
    return f_v(w, v, feedback_ratio(params));
}

namespace detail {

// y-values where the symbol's indicators switch: |y| = 1, |e^{v/2} y| = 1,
// and z_2(y) = 1 (the last only when the feedback ratio is positive).
// Supplied to the quadrature as panel borders.
inline std::vector<double> indicator_breakpoints(double v, double ratio) {
    std::vector<double> breaks = {-1.0, 1.0};
    const double scale = std::exp(-v / 2.0);
    breaks.push_back(scale);
    breaks.push_back(-scale);
    if (ratio > 0.0) {
        const double w_star = std::sqrt((std::numbers::e - 1.0) / ratio);
        breaks.push_back(w_star);
        breaks.push_back(-w_star);
    }
    return breaks;
}

} // namespace detail

// \int h dNtilde by pullback.  h must be integrable against the image
// measure; in particular h(z) = O(|z|^2) near z = 0 for infinite-activity
// bases (the caller guarantees this, as every integrand in this library
// does by construction).
template <class H>
QuadratureResult<std::complex<double>> integrate_against_image(H&& h, const ImageMeasureSpec& spec,
                                                               const QuadratureOptions& opts = {}) {
    auto pullback = [&](double w) -> std::complex<double> {
        return h(f_v(w, spec.v, spec.feedback_ratio));
    };
    return integrate_levy(spec.base, pullback,
                          detail::indicator_breakpoints(spec.v, spec.feedback_ratio), opts);
}

// First-order coefficients of the symbol / generator / characteristics.
// One implementation serves all three so they agree bitwise.
struct DriftCoefficients {
    double b1 = 0.0;
    double b2 = 0.0;
    double quadrature_error = 0.0;
};

inline DriftCoefficients drift_coefficients(double v, const CogarchParams& params,
                                            const QuadratureOptions& opts = {}) {
    const double ratio = feedback_ratio(params);
    const double ev2 = std::exp(v / 2.0);

    DriftCoefficients out;
    out.b1 = params.driver.drift * ev2;
    out.b2 = params.beta * std::exp(-v) + std::log(params.delta);

    if (!is_zero_measure(params.driver.measure)) {
        const std::vector<double> breaks = detail::indicator_breakpoints(v, ratio);
        auto inside_state_box = [&](double y) {
            return std::abs(ev2 * y) < 1.0 && std::abs(log_volatility_jump(y, ratio)) < 1.0;
        };

        auto level_integrand = [&](double y) {
            const double mapped = inside_state_box(y) ? 1.0 : 0.0;
            const double plain = (std::abs(y) < 1.0) ? 1.0 : 0.0;
            return y * (mapped - plain);
        };
        auto r1 = integrate_levy(params.driver.measure, level_integrand, breaks, opts);
        out.b1 += ev2 * r1.value;
        out.quadrature_error += std::abs(ev2) * r1.error_estimate;

        auto volatility_integrand = [&](double y) {
            return inside_state_box(y) ? log_volatility_jump(y, ratio) : 0.0;
        };
        auto r2 = integrate_levy(params.driver.measure, volatility_integrand, breaks, opts);
        out.b2 += r2.value;
        out.quadrature_error += r2.error_estimate;
    }
    return out;
}

// The closed-form symbol.  Independent of x.g by construction: only v
// enters any term.
inline SymbolValue cogarch_symbol(const StatePoint& x, const std::array<double, 2>& xi,
                                  const CogarchParams& params, const QuadratureOptions& opts = {}) {
    const std::complex<double> i(0.0, 1.0);
    const double v = x.v;

    const DriftCoefficients drift = drift_coefficients(v, params, opts);

    SymbolValue out;
    out.quadrature_error = drift.quadrature_error;
    out.value = -i * xi[0] * drift.b1 - i * xi[1] * drift.b2 +
                0.5 * xi[0] * xi[0] * std::exp(v) * params.driver.gaussian;

    if (!is_zero_measure(params.driver.measure)) {
        ImageMeasureSpec image{params.driver.measure, v, feedback_ratio(params)};
        auto jump_integrand = [&](const std::array<double, 2>& z) -> std::complex<double> {
            const double phase = z[0] * xi[0] + z[1] * xi[1];
            const bool compensated = std::abs(z[0]) < 1.0 && std::abs(z[1]) < 1.0;
            return compensated ? detail::expi_m1_m_it(phase) : detail::expi_m1(phase);
        };
        auto jump = integrate_against_image(jump_integrand, image, opts);
        out.value -= jump.value;
        out.quadrature_error += jump.error_estimate;
    }
    return out;
}

// Symbol of a Lévy-driven SDE dX = Phi(X_-) dZ: the driver's characteristic
// exponent evaluated at Phi(x)' xi.
template <class PhiFn, class PsiFn>
std::complex<double> sde_symbol(PhiFn&& Phi, PsiFn&& psi, const std::vector<double>& x,
                                const std::vector<double>& xi) {
    const std::vector<double> column = Phi(x);
    if (column.size() != xi.size())
        throw std::invalid_argument("sde_symbol: Phi(x) and xi dimensions differ");
    double dot = 0.0;
    for (std::size_t k = 0; k < column.size(); ++k) dot += column[k] * xi[k];
    return psi(dot);
}

} // namespace cogarch
