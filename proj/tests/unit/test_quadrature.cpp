#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "htwk/quadrature.hpp"

using namespace htwk;
using doctest::Approx;

TEST_CASE("finite interval") {
    CHECK(quad::integrate([](double x) { return x * x; }, 0, 1) == Approx(1.0 / 3).epsilon(1e-14));
    CHECK(quad::integrate([](double x) { return std::cos(x); }, 0, M_PI / 2) == Approx(1.0).epsilon(1e-14));
    CHECK(quad::integrate([](double) { return 1.0; }, 2, 2) == 0.0);
}

TEST_CASE("convergent improper integrals") {
    auto r = quad::integrate_to_infinity([](double x) { return std::pow(1 + x, -2.0); });
    CHECK(r.finite);
    CHECK(r.value == Approx(1.0).epsilon(1e-10));

    r = quad::integrate_to_infinity([](double x) { return std::exp(-x); });
    CHECK(r.finite);
    CHECK(r.value == Approx(1.0).epsilon(1e-12));

    // Slow decay: (1 + x)^{-1.2} integrates to 5.
    r = quad::integrate_to_infinity([](double x) { return std::pow(1 + x, -1.2); });
    CHECK(r.finite);
    CHECK(r.value == Approx(5.0).epsilon(1e-8));
}

TEST_CASE("shifted integrands with a scaled first panel") {
    quad::PanelOptions opt;
    opt.x0 = 1e4;
    auto r = quad::integrate_to_infinity([](double t) { return std::pow(1 + 1e4 + t, -2.0); }, opt);
    CHECK(r.finite);
    CHECK(r.value == Approx(1.0 / (1 + 1e4)).epsilon(1e-10));
}

TEST_CASE("divergent integrals are flagged with their partial sum") {
    auto r = quad::integrate_to_infinity([](double x) { return 1.0 / (1 + x); });
    CHECK_FALSE(r.finite);
    CHECK(r.value > 5.0);

    r = quad::integrate_to_infinity([](double x) { return std::pow(1 + x, -0.5); });
    CHECK_FALSE(r.finite);
}
