#pragma once

// Adaptive Gauss-Kronrod 7/15 quadrature for real- and complex-valued
// integrands on a finite interval.  Known non-smooth points (indicator
// boundaries, support edges) are supplied as breakpoints and become panel
// borders, so each panel sees a smooth integrand.  Non-convergence raises
// QuadratureError carrying the achieved error estimate, never a silent
// wrong value.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace cogarch {

struct QuadratureOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_panels = 4000;
};

class QuadratureError : public std::runtime_error {
  public:
    QuadratureError(const std::string& what, double achieved, double requested)
        : std::runtime_error(what), achieved_error(achieved), requested_error(requested) {}

    double achieved_error;  // best error estimate reached before giving up
    double requested_error; // tolerance that could not be met
};

template <class T>
struct QuadratureResult {
    T value{};
    double error_estimate = 0.0;
    int panels = 0;
};

namespace detail {

// 15-point Kronrod abscissae on [0,1] side of [-1,1] (symmetric) and the
// matching weights; odd-indexed abscissae carry the embedded 7-point Gauss
// rule.  Classic values, correct to double precision.
inline constexpr double kronrod_nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr double kronrod_weights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr double gauss_weights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Panel {
    double a = 0.0, b = 0.0;
    T value{};
    double error = 0.0;

    bool operator<(const Panel& o) const noexcept { return error < o.error; }
};

// Evaluate the 7/15 pair on [a, b].  The error estimate follows the
// QUADPACK recipe: the raw Kronrod-Gauss difference is damped through the
// variation integral resasc so that it neither collapses on oscillatory
// integrands nor demands accuracy below roundoff (floor at 50 eps resabs).
template <class F, class T>
Panel<T> evaluate_panel(F& f, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);

    T fv[15];
    // index 7 is the center; i and 14-i are the symmetric pair for node i
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kronrod_nodes[i];
        fv[i] = f(mid - dx);
        fv[14 - i] = f(mid + dx);
    }
    fv[7] = f(mid);

    T resk{};
    T resg{};
    double resabs = 0.0;
    for (int i = 0; i < 8; ++i) {
        const T pair = (i == 7) ? fv[7] : static_cast<T>(fv[i] + fv[14 - i]);
        resk += kronrod_weights[i] * pair;
        resabs += kronrod_weights[i] * ((i == 7) ? std::abs(fv[7])
                                                 : std::abs(fv[i]) + std::abs(fv[14 - i]));
        if (i % 2 == 1) resg += gauss_weights[i / 2] * pair;
    }

    const T mean = resk * 0.5;
    double resasc = 0.0;
    for (int i = 0; i < 8; ++i) {
        resasc += kronrod_weights[i] *
                  ((i == 7) ? std::abs(fv[7] - mean)
                            : std::abs(fv[i] - mean) + std::abs(fv[14 - i] - mean));
    }

    Panel<T> p;
    p.a = a;
    p.b = b;
    p.value = resk * half;
    resabs *= std::abs(half);
    resasc *= std::abs(half);

    double err = std::abs(static_cast<T>(resk - resg)) * std::abs(half);
    if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    constexpr double eps = std::numeric_limits<double>::epsilon();
    err = std::max(err, 50.0 * eps * resabs);
    p.error = err;

    if (!std::isfinite(std::abs(p.value)) || !std::isfinite(p.error)) {
        throw QuadratureError("quadrature: integrand returned a non-finite value on [" +
                                  std::to_string(a) + ", " + std::to_string(b) + "]",
                              std::numeric_limits<double>::infinity(), 0.0);
    }
    return p;
}

} // namespace detail

// Integrate f over [a, b].  `breakpoints` lists interior points where the
// integrand is allowed to be non-smooth; they seed the initial panel set.
template <class F>
auto integrate_adaptive(F&& f, double a, double b,
                        const std::vector<double>& breakpoints = {},
                        const QuadratureOptions& opts = {})
    -> QuadratureResult<std::invoke_result_t<F&, double>> {
    using T = std::invoke_result_t<F&, double>;

    QuadratureResult<T> out;
    if (a == b) return out;
    if (a > b) {
        auto swapped = integrate_adaptive(f, b, a, breakpoints, opts);
        swapped.value = -swapped.value;
        return swapped;
    }

    std::vector<double> edges;
    edges.push_back(a);
    for (double x : breakpoints) {
        if (x > a && x < b) edges.push_back(x);
    }
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::priority_queue<detail::Panel<T>> queue;
    T total{};
    double total_err = 0.0;
    int panels = 0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        auto p = detail::evaluate_panel<F, T>(f, edges[i], edges[i + 1]);
        total += p.value;
        total_err += p.error;
        ++panels;
        queue.push(p);
    }

    auto tolerance = [&]() { return std::max(opts.abs_tol, opts.rel_tol * std::abs(total)); };

    while (total_err > tolerance()) {
        if (panels >= opts.max_panels) {
            throw QuadratureError(
                "quadrature: error estimate " + std::to_string(total_err) +
                    " above tolerance " + std::to_string(tolerance()) + " after " +
                    std::to_string(panels) + " panels",
                total_err, tolerance());
        }
        detail::Panel<T> worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // Interval no longer splittable in double precision; accept what
            // we have rather than loop forever.
            queue.push(worst);
            break;
        }
        auto left = detail::evaluate_panel<F, T>(f, worst.a, mid);
        auto right = detail::evaluate_panel<F, T>(f, mid, worst.b);
        total += (left.value + right.value) - worst.value;
        total_err += (left.error + right.error) - worst.error;
        ++panels;
        queue.push(left);
        queue.push(right);
    }

    out.value = total;
    out.error_estimate = total_err;
    out.panels = panels;
    return out;
}

} // namespace cogarch
