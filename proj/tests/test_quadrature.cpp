#include "pilotwave/quadrature.hpp"

#include <doctest.h>

#include <cmath>

using namespace pilotwave;

TEST_SUITE("quadrature") {

TEST_CASE("adaptive simpson reproduces closed-form integrals") {
    CHECK(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-10) ==
          doctest::Approx(2.0).epsilon(1e-9));
    CHECK(adaptive_simpson([](double x) { return x * x * x * x * x; }, 0.0, 1.0, 1e-12) ==
          doctest::Approx(1.0 / 6.0).epsilon(1e-10));
    // Standard normal over +-8 sigma: mass 1 up to ~1e-15 tails.
    auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); };
    CHECK(adaptive_simpson(phi, -8.0, 8.0, 1e-11) == doctest::Approx(1.0).epsilon(1e-9));
    // Orientation and the empty interval.
    CHECK(adaptive_simpson([](double x) { return x; }, 2.0, 2.0, 1e-10) == 0.0);
}

TEST_CASE("adaptive simpson throws when refinement cannot converge") {
    // A step function defeats the error estimate at tolerances far below the
    // jump: each halving shrinks the bracketing interval and its tolerance
    // share at the same rate.
    auto step = [](double x) { return x < 0.3 ? 0.0 : 1.0; };
    CHECK_THROWS_AS(adaptive_simpson(step, 0.0, 1.0, 1e-13, 8), quadrature_error);
}

TEST_CASE("gauss-legendre 16 is exact through degree 31") {
    const double a = -2.0, b = 3.0;
    for (int k = 0; k <= 31; ++k) {
        auto mono = [k](double x) { return std::pow(x, k); };
        const double exact =
            (std::pow(b, k + 1) - std::pow(a, k + 1)) / static_cast<double>(k + 1);
        CHECK(GaussLegendre16::integrate(mono, a, b) ==
              doctest::Approx(exact).epsilon(1e-12));
    }
    // ...and not beyond: degree 32 must show a genuine truncation error.
    auto mono32 = [](double x) { return std::pow(x, 32); };
    const double exact32 = (std::pow(b, 33) - std::pow(a, 33)) / 33.0;
    CHECK(std::abs(GaussLegendre16::integrate(mono32, a, b) - exact32) / exact32 > 1e-12);
}

TEST_CASE("gauss-legendre tensor cell matches separable products") {
    auto f = [](double x, double y) { return std::sin(x) * std::cos(y); };
    const double exact = (std::cos(0.0) - std::cos(1.5)) * (std::sin(2.0) - std::sin(0.5));
    CHECK(GaussLegendre16::integrate_cell(f, 0.0, 1.5, 0.5, 2.0) ==
          doctest::Approx(exact).epsilon(1e-13));
}

TEST_CASE("integrate_2d handles separable and coupled integrands") {
    CHECK(integrate_2d([](double x, double y) { return x * y; }, 0.0, 1.0, 0.0, 1.0, 1e-10) ==
          doctest::Approx(0.25).epsilon(1e-9));
    auto gauss2 = [](double x, double y) {
        return std::exp(-0.5 * (x * x + y * y)) / (2.0 * M_PI);
    };
    CHECK(integrate_2d(gauss2, -7.0, 7.0, -7.0, 7.0, 1e-8) ==
          doctest::Approx(1.0).epsilon(1e-7));
    // Non-separable coupling term.
    auto coupled = [](double x, double y) { return std::exp(x * y); };
    // integral over [0,1]^2 of e^{xy} = sum_k 1/(k+1)!/(k+1) -- evaluate the series.
    double series = 0.0, fact = 1.0;
    for (int k = 0; k < 20; ++k) {
        if (k > 0) fact *= k;
        series += 1.0 / (fact * (k + 1) * (k + 1));
    }
    CHECK(integrate_2d(coupled, 0.0, 1.0, 0.0, 1.0, 1e-10) ==
          doctest::Approx(series).epsilon(1e-9));
}

TEST_CASE("cdf table matches the normal closed form") {
    auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); };
    const CdfTable table(phi, -8.0, 8.0, 4097);
    CHECK(table.total_mass() == doctest::Approx(1.0).epsilon(1e-10));
    for (double x : {-3.0, -1.0, -0.25, 0.0, 0.5, 1.0, 2.5}) {
        const double exact = 0.5 * (1.0 + std::erf(x / std::sqrt(2.0)));
        CHECK(table(x) == doctest::Approx(exact).epsilon(1e-7));
    }
    CHECK(table(-9.0) == 0.0);
    CHECK(table(9.0) == 1.0);
}

TEST_CASE("cdf table rejects a vanishing density") {
    CHECK_THROWS_AS(CdfTable([](double) { return 0.0; }, 0.0, 1.0, 65), quadrature_error);
}

} // TEST_SUITE
