#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <cogarch/symbol.hpp>

using namespace cogarch;
using Catch::Approx;

namespace {

CogarchParams cp_driver_params() {
    CogarchParams p;
    p.beta = 1.0;
    p.delta = 0.5;
    p.lam = 0.25;
    AtomicMeasure m;
    m.atoms.push_back({0.5, 2.0});
    p.driver.measure = m;
    return p;
}

CogarchParams density_driver_params() {
    CogarchParams p;
    p.beta = 1.0;
    p.delta = 0.5;
    p.lam = 0.25;
    DensityMeasure d;
    d.small_jump_exponent = 1.5;
    d.y_min = -8.0;
    d.y_max = 8.0;
    d.density = [](double y) {
        const double a = std::abs(y);
        return std::pow(a, -2.5) * std::exp(-a);
    };
    p.driver.drift = 0.1;
    p.driver.gaussian = 0.2;
    p.driver.measure = d;
    return p;
}

// Smallest diagonal pivot of the LDL* factorization of a Hermitian matrix.
// Nonnegative (up to roundoff) iff the matrix is positive semidefinite.
double min_ldl_pivot(const std::vector<std::vector<std::complex<double>>>& A) {
    const std::size_t n = A.size();
    std::vector<std::vector<std::complex<double>>> L(n, std::vector<std::complex<double>>(n));
    std::vector<double> d(n, 0.0);
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        std::complex<double> diag = A[j][j];
        for (std::size_t k = 0; k < j; ++k) diag -= L[j][k] * std::conj(L[j][k]) * d[k];
        d[j] = diag.real();
        mn = std::min(mn, d[j]);
        for (std::size_t i = j + 1; i < n; ++i) {
            std::complex<double> s = A[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= L[i][k] * std::conj(L[j][k]) * d[k];
            L[i][j] = (d[j] != 0.0) ? s / d[j] : std::complex<double>(0.0);
        }
    }
    return mn;
}

void check_schoenberg(const CogarchParams& params, const StatePoint& x, double t) {
    const std::vector<std::array<double, 2>> xis = {
        {0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {-1.0, 1.0}, {0.5, -0.7}};
    const std::size_t n = xis.size();
    std::vector<std::vector<std::complex<double>>> M(n, std::vector<std::complex<double>>(n));
    double max_diag = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            const std::array<double, 2> diff = {xis[j][0] - xis[k][0], xis[j][1] - xis[k][1]};
            M[j][k] = std::exp(-t * cogarch_symbol(x, diff, params).value);
        }
        max_diag = std::max(max_diag, M[j][j].real());
    }
    REQUIRE(min_ldl_pivot(M) >= -1e-10 * max_diag);
}

} // namespace

TEST_CASE("the jump map scales the level by sigma and lifts the squared jump") {
    const std::array<double, 2> z = f_v(1.0, 0.0, 0.5);
    REQUIRE(z[0] == 1.0);
    REQUIRE(z[1] == Approx(0.40546510810816438198).epsilon(1e-15));

    const std::array<double, 2> z2 = f_v(-0.5, 2.0 * std::log(3.0), 0.5);
    REQUIRE(z2[0] == Approx(-1.5).epsilon(1e-15)); // e^{v/2} = 3
    REQUIRE(z2[1] == Approx(0.11778303565638345454).epsilon(1e-15));
}

TEST_CASE("pullback integration against an atomic image measure is an exact sum") {
    AtomicMeasure m;
    m.atoms.push_back({0.5, 2.0});
    m.atoms.push_back({-1.2, 0.7});
    const ImageMeasureSpec spec{m, 0.3, 0.5};

    auto h = [](const std::array<double, 2>& z) -> std::complex<double> {
        return {z[0] + 2.0 * z[1], z[0] * z[1]};
    };
    const auto got = integrate_against_image(h, spec, {});

    std::complex<double> expected{0.0, 0.0};
    for (const Atom& a : m.atoms) {
        expected += a.rate * h(f_v(a.size, spec.v, spec.feedback_ratio));
    }
    REQUIRE(got.value.real() == Approx(expected.real()).epsilon(1e-15));
    REQUIRE(got.value.imag() == Approx(expected.imag()).epsilon(1e-15));
    REQUIRE(got.error_estimate == 0.0); // atomic sums carry no quadrature error
}

TEST_CASE("drift coefficients treat a boundary atom as untruncated") {
    // the atom at y = 1 maps to z1 = 1 exactly; strict indicators exclude it,
    // so neither integral contributes and b2 is the pure flow drift
    CogarchParams p;
    p.beta = 1.0;
    p.delta = 0.5;
    p.lam = 0.25;
    AtomicMeasure m;
    m.atoms.push_back({1.0, 1.0});
    p.driver.measure = m;

    const DriftCoefficients d = drift_coefficients(0.0, p);
    REQUIRE(d.b1 == 0.0);
    REQUIRE(d.b2 == Approx(0.30685281944005469058).epsilon(1e-15));
}

TEST_CASE("symbol matches the frozen reference for a boundary-atom driver") {
    CogarchParams p;
    p.beta = 1.0;
    p.delta = 0.5;
    p.lam = 0.25;
    AtomicMeasure m;
    m.atoms.push_back({1.0, 1.0});
    p.driver.measure = m;

    const SymbolValue s = cogarch_symbol({0.0, 0.0}, {1.0, 1.0}, p);
    REQUIRE(s.value.real() == Approx(0.83542095783298461217).epsilon(1e-14));
    REQUIRE(s.value.imag() == Approx(-1.2932167172381177412).epsilon(1e-14));
}

TEST_CASE("symbol matches the frozen references for the compound-Poisson driver") {
    const CogarchParams p = cp_driver_params();
    const StatePoint x{0.0, 0.0};

    const auto at = [&](double a, double b) { return cogarch_symbol(x, {a, b}, p).value; };

    REQUIRE(at(1.0, 0.0).real() == Approx(0.244834876219254568).epsilon(1e-14));
    REQUIRE(at(1.0, 0.0).imag() == Approx(0.0411489227915939995).epsilon(1e-13));
    REQUIRE(at(2.0, 2.0).real() == Approx(1.34202676638423932).epsilon(1e-14));
    REQUIRE(at(2.0, 2.0).imag() == Approx(-0.502374806268940246).epsilon(1e-14));
    REQUIRE(at(-2.0, 1.0).real() == Approx(0.729118241581539).epsilon(1e-14));
    REQUIRE(at(-2.0, 1.0).imag() == Approx(-0.762553769346712008).epsilon(1e-14));
    REQUIRE(at(0.0, 2.0).real() == Approx(0.0552352404188988824).epsilon(1e-13));
    REQUIRE(at(0.0, 2.0).imag() == Approx(-1.08049256017446395).epsilon(1e-14));
}

TEST_CASE("symbol matches the frozen references for the density driver") {
    const CogarchParams p = density_driver_params();
    const StatePoint x{0.0, 0.3};

    const SymbolValue s1 = cogarch_symbol(x, {0.7, -1.2}, p);
    REQUIRE(s1.quadrature_error < 1e-8);
    REQUIRE(s1.value.real() == Approx(1.2581422182646698803).margin(1e-8));
    REQUIRE(s1.value.imag() == Approx(1.70166963781465335).margin(1e-8));

    const SymbolValue s2 = cogarch_symbol(x, {-1.5, 0.4}, p);
    REQUIRE(s2.quadrature_error < 1e-8);
    REQUIRE(s2.value.real() == Approx(5.0809497219802785864).margin(1e-8));
    REQUIRE(s2.value.imag() == Approx(-0.28973371646533218909).margin(1e-8));
}

TEST_CASE("symbol never depends on the level component, bitwise") {
    for (const CogarchParams& p : {cp_driver_params(), density_driver_params()}) {
        const std::array<double, 2> xi = {0.9, -1.7};
        const SymbolValue ref = cogarch_symbol({0.0, 0.3}, xi, p);
        for (double g : {-10.0, 3.5, 10.0}) {
            const SymbolValue s = cogarch_symbol({g, 0.3}, xi, p);
            REQUIRE(s.value.real() == ref.value.real());
            REQUIRE(s.value.imag() == ref.value.imag());
            REQUIRE(s.quadrature_error == ref.quadrature_error);
        }
    }
}

TEST_CASE("pure-diffusion symbol is the exact quadratic-plus-drift expression") {
    CogarchParams p;
    p.beta = 1.0;
    p.delta = 0.5;
    p.lam = 0.25;
    p.driver.drift = 0.3;
    p.driver.gaussian = 1.5;

    const double v = 0.4;
    const std::array<double, 2> xi = {1.3, -0.8};
    const SymbolValue s = cogarch_symbol({2.0, v}, xi, p);
    const DriftCoefficients d = drift_coefficients(v, p);

    REQUIRE(s.quadrature_error == 0.0);
    REQUIRE(s.value.real() == 0.5 * xi[0] * xi[0] * std::exp(v) * p.driver.gaussian);
    REQUIRE(s.value.imag() == -(xi[0] * d.b1) - xi[1] * d.b2);
    // and the coefficients themselves are the closed-form expressions
    REQUIRE(d.b1 == p.driver.drift * std::exp(v / 2.0));
    REQUIRE(d.b2 == p.beta * std::exp(-v) + std::log(p.delta));
}

TEST_CASE("symbol vanishes at frequency zero and is hermitian in frequency") {
    for (const CogarchParams& p : {cp_driver_params(), density_driver_params()}) {
        const StatePoint x{0.0, 0.3};
        const SymbolValue zero = cogarch_symbol(x, {0.0, 0.0}, p);
        REQUIRE(std::abs(zero.value) < 1e-12);

        for (const std::array<double, 2>& xi :
             std::vector<std::array<double, 2>>{{1.0, 0.0}, {0.6, -1.1}, {-2.0, 0.5}}) {
            const auto plus = cogarch_symbol(x, xi, p).value;
            const auto minus = cogarch_symbol(x, {-xi[0], -xi[1]}, p).value;
            REQUIRE(minus.real() == Approx(plus.real()).margin(1e-12));
            REQUIRE(minus.imag() == Approx(-plus.imag()).margin(1e-12));
            // negative definiteness forces a nonnegative real part
            REQUIRE(plus.real() >= -1e-12);
        }
    }
}

TEST_CASE("exp(-t symbol) is positive semidefinite on a frequency grid") {
    check_schoenberg(cp_driver_params(), {0.0, 0.3}, 0.4);

    CogarchParams mixed = cp_driver_params();
    mixed.driver.gaussian = 1.0;
    mixed.driver.drift = -0.2;
    check_schoenberg(mixed, {1.0, -0.5}, 0.7);
}

TEST_CASE("SDE symbols reduce to the driver exponent at the scaled frequency") {
    LevyTriplet t;
    t.drift = 0.4;
    t.gaussian = 0.9;
    auto psi = [&](double u) { return characteristic_exponent(t, u, {}); };
    auto Phi = [](const std::vector<double>&) { return std::vector<double>{2.0}; };

    const auto via_sde = sde_symbol(Phi, psi, {5.0}, {0.7});
    const auto direct = psi(2.0 * 0.7);
    REQUIRE(via_sde.real() == direct.real());
    REQUIRE(via_sde.imag() == direct.imag());

    auto Phi2 = [](const std::vector<double>&) { return std::vector<double>{1.0, 2.0}; };
    REQUIRE_THROWS_AS(sde_symbol(Phi2, psi, {0.0}, {0.7}), std::invalid_argument);
}
