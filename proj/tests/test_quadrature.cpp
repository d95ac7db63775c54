#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <cogarch/quadrature.hpp>

using namespace cogarch;
using Catch::Approx;

TEST_CASE("polynomials and trig integrate to machine accuracy") {
    auto sq = [](double x) { return x * x; };
    REQUIRE(integrate_adaptive(sq, 0.0, 1.0, {}, {}).value == Approx(1.0 / 3.0).epsilon(1e-14));

    auto s = [](double x) { return std::sin(x); };
    REQUIRE(integrate_adaptive(s, 0.0, std::numbers::pi, {}, {}).value ==
            Approx(2.0).epsilon(1e-14));
}

TEST_CASE("complex integrands integrate componentwise") {
    auto f = [](double x) { return std::complex<double>(std::cos(x), std::sin(x)); };
    const auto r = integrate_adaptive(f, 0.0, 2.0 * std::numbers::pi, {}, {});
    REQUIRE(std::abs(r.value) < 1e-12);
}

TEST_CASE("reversed limits negate the integral") {
    auto f = [](double x) { return std::exp(x); };
    const double fwd = integrate_adaptive(f, 0.0, 1.0, {}, {}).value;
    const double bwd = integrate_adaptive(f, 1.0, 0.0, {}, {}).value;
    REQUIRE(fwd == Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
    REQUIRE(bwd == Approx(-fwd).epsilon(1e-15));
}

TEST_CASE("breakpoints resolve kinks exactly") {
    auto f = [](double x) { return std::abs(x - 0.5); };
    // exact: 2 * (0.5^2 / 2) = 0.25
    const auto r = integrate_adaptive(f, 0.0, 1.0, {0.5}, {});
    REQUIRE(r.value == Approx(0.25).epsilon(1e-14));
}

TEST_CASE("indicator integrands converge when the edge is a breakpoint") {
    auto f = [](double x) { return x < 0.3 ? 1.0 : 0.0; };
    const auto r = integrate_adaptive(f, 0.0, 1.0, {0.3}, {});
    REQUIRE(r.value == Approx(0.3).epsilon(1e-12));
}

TEST_CASE("error estimate is honest for smooth integrands") {
    auto f = [](double x) { return std::exp(-x * x); };
    const auto r = integrate_adaptive(f, -3.0, 3.0, {}, {});
    const double exact = std::sqrt(std::numbers::pi) * std::erf(3.0);
    REQUIRE(std::abs(r.value - exact) <= std::max(r.error_estimate, 1e-13));
}

TEST_CASE("panel exhaustion raises a quadrature error") {
    QuadratureOptions opts;
    opts.abs_tol = 1e-16;
    opts.rel_tol = 1e-16;
    opts.max_panels = 3;
    auto f = [](double x) { return std::sin(37.0 * x) / (1e-6 + x * x); };
    REQUIRE_THROWS_AS(integrate_adaptive(f, -1.0, 1.0, {}, opts), QuadratureError);
}

TEST_CASE("divergent integrands fail loudly instead of returning garbage") {
    auto f = [](double x) { return 1.0 / x; };
    REQUIRE_THROWS_AS(integrate_adaptive(f, -1.0, 1.0, {0.0}, {}), QuadratureError);
}

TEST_CASE("non-finite integrand values are rejected") {
    auto f = [](double) { return std::numeric_limits<double>::quiet_NaN(); };
    REQUIRE_THROWS_AS(integrate_adaptive(f, 0.0, 1.0, {}, {}), QuadratureError);
}
