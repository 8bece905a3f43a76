#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "htwk/tailmath.hpp"

using namespace htwk;
using doctest::Approx;

namespace {

const IncrementModel& default_model() {
    static const IncrementModel m = model_from_spec(distspec::default_model_spec);
    return m;
}

// Independent oracle for the default model:
//   G1(x) = (1/K) int_x^inf (sqrt(1 + t - x) + 1) 0.75 (1 + t)^{-2.5} dt
double g1_default_oracle(double x) {
    boost::math::quadrature::exp_sinh<double> integrator;
    auto f = [x](double s) { return (std::sqrt(1 + s) + 1) * 0.75 * std::pow(1 + x + s, -2.5); };
    return integrator.integrate(f) / 1.25;
}

}  // namespace

TEST_CASE("truncated mean in closed form") {
    TruncatedMean m(default_model());
    for (double x : {1e-9, 1e-7, 1e-3, 0.5, 3.0, 17.0, 1e4, 1e9, 1e15}) {
        CAPTURE(x);
        CHECK(m(x) == Approx(std::sqrt(1 + x) - 1).epsilon(1e-11));
        CHECK(m.ratio(x) == Approx(std::sqrt(1 + x) + 1).epsilon(1e-10));
        if (x >= 1e-7) CHECK(m.ratio_derivative(x) == Approx(0.5 / std::sqrt(1 + x)).epsilon(1e-6));
    }
    CHECK(m(3.0) == Approx(1.0).epsilon(1e-13));
    CHECK(m(0.0) == 0.0);
    CHECK(m.ratio(0.0) == 2.0);
}

TEST_CASE("truncated mean with negative atoms") {
    TruncatedMean m(model_from_spec("mix(0.5: exponential(1), 0.25: neg(point(2)), 0.25: neg(point(5)))"));
    // N(y) = 0.5 on [0, 2), 0.25 on [2, 5), 0 beyond.
    CHECK(m(1.0) == Approx(0.5));
    CHECK(m(2.0) == Approx(1.0));
    CHECK(m(4.0) == Approx(1.5));
    CHECK(m(10.0) == Approx(1.75));
}

TEST_CASE("K for the reference and bounded models") {
    auto k = criterion_K(default_model());
    CHECK(k.finite);
    CHECK(k.value == Approx(1.25).epsilon(1e-9));

    auto kb = criterion_K(model_from_spec("mix(0.5: point(1), 0.5: neg(pareto(0.5, 1)))"));
    CHECK(kb.finite);
    CHECK(kb.value == Approx(0.5 / (std::sqrt(2.0) - 1)).epsilon(1e-12));

    auto kd = criterion_K(model_from_spec("mix(0.5: pareto(0.4, 1), 0.5: neg(pareto(0.5, 1)))"));
    CHECK_FALSE(kd.finite);

    CHECK_THROWS_AS(criterion_K(model_from_spec("mix(0.5: pareto(1.5, 1), 0.5: neg(exponential(1)))")),
                    PreconditionError);
}

TEST_CASE("K for a Theorem-2(b) type model against an independent integral") {
    IncrementModel m = model_from_spec("mix(0.5: pareto(0.9, 1), 0.5: neg(pareto(0.5, 1)))");
    boost::math::quadrature::exp_sinh<double> integrator;
    const double oracle = integrator.integrate(
        [](double x) { return (std::sqrt(1 + x) + 1) * 0.45 * std::pow(1 + x, -1.9); });
    auto k = criterion_K(m);
    CHECK(k.finite);
    CHECK(k.value == Approx(oracle).epsilon(1e-8));
}

TEST_CASE("mu_plus") {
    CHECK(mu_plus(default_model()) == Approx(1.0).epsilon(1e-9));
    CHECK(mu_plus(model_from_spec("pareto(1.5, 1)")) == Approx(2.0).epsilon(1e-9));
    CHECK(mu_plus(model_from_spec("exponential(4)")) == Approx(0.25).epsilon(1e-12));
    CHECK_THROWS_AS(mu_plus(model_from_spec("pareto(0.9, 1)")), DivergenceError);
}

TEST_CASE("G1 tail") {
    G1Tail g(default_model());
    CHECK(g.K() == Approx(1.25).epsilon(1e-9));
    CHECK(g(0.0) == Approx(1.0).epsilon(1e-9));
    CHECK(g(-1.0) == 1.0);
    double prev = 1.0;
    for (double x : {0.1, 1.0, 5.0, 50.0, 500.0, 1e4, 1e6}) {
        CAPTURE(x);
        const double v = g(x);
        CHECK(v == Approx(g1_default_oracle(x)).epsilon(1e-8));
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("G1 tail of the bounded model") {
    IncrementModel m = model_from_spec("mix(0.5: point(1), 0.5: neg(pareto(0.5, 1)))");
    G1Tail g(m);
    CHECK(g(0.0) == Approx(1.0).epsilon(1e-12));
    CHECK(g(0.5) == Approx((std::sqrt(1.5) + 1) / (std::sqrt(2.0) + 1)).epsilon(1e-12));
    CHECK(g(1.0) == 0.0);
    CHECK(g(3.0) == 0.0);
}

TEST_CASE("G_H representations agree") {
    TruncatedMean m(default_model());
    std::vector<RenewalMeasure> hs = {RenewalMeasure::lebesgue(), RenewalMeasure::x_over_m(m),
                                      RenewalMeasure::x_over_m(m, 0.3)};
    for (const auto& h : hs) {
        for (double x : {0.0, 1.0, 10.0, 100.0, 1e4}) {
            auto f = gh_tail_forms(default_model(), h, x);
            CAPTURE(x);
            CHECK(f.stieltjes == Approx(f.by_parts).epsilon(1e-8));
        }
    }
    // H = Lebesgue: integral of 0.5 (1 + t + x)^{-1.5} dt = (1 + x)^{-1/2}.
    for (double x : {0.0, 3.0, 99.0}) {
        CHECK(gh_tail_forms(default_model(), RenewalMeasure::lebesgue(), x).stieltjes ==
              Approx(std::pow(1 + x, -0.5)).epsilon(1e-10));
    }
}

TEST_CASE("G_H forms with an atom in F") {
    // F has an atom at 1: with H Lebesgue the tail is (1 - x) / 2 on [0, 1).
    IncrementModel m = model_from_spec("mix(0.5: point(1), 0.5: neg(pareto(0.5, 1)))");
    TruncatedMean tm(m);
    for (double x : {0.0, 0.25, 0.9}) {
        auto leb = gh_tail_forms(m, RenewalMeasure::lebesgue(), x);
        CHECK(leb.stieltjes == Approx(0.5 * (1 - x)).epsilon(1e-12));
        CHECK(leb.by_parts == Approx(0.5 * (1 - x)).epsilon(1e-12));
        auto xm = gh_tail_forms(m, RenewalMeasure::x_over_m(tm), x);
        CHECK(xm.stieltjes == Approx(xm.by_parts).epsilon(1e-12));
        CHECK(xm.by_parts == Approx(0.5 * tm.ratio(1 - x)).epsilon(1e-12));
    }
}

TEST_CASE("G_H with Lebesgue H clips at one") {
    IncrementModel p = model_from_spec("pareto(1.5, 1)");
    CHECK(gh_tail(p, RenewalMeasure::lebesgue(), 8.0) == Approx(2.0 / 3).epsilon(1e-10));
    CHECK(gh_tail(p, RenewalMeasure::lebesgue(), 3.0) == Approx(1.0).epsilon(1e-10));
    CHECK(gh_tail(p, RenewalMeasure::lebesgue(), 0.5) == 1.0);
    CHECK_THROWS_AS(gh_tail(model_from_spec("pareto(0.9, 1)"), RenewalMeasure::lebesgue(), 1.0),
                    PreconditionError);
}

TEST_CASE("G_H with H = x / (K m) reproduces G1") {
    G1Tail g(default_model());
    auto h = RenewalMeasure::x_over_m(g.m(), 1.0 / g.K());
    for (double x : {0.0, 2.0, 40.0, 3e3}) {
        CHECK(gh_tail(default_model(), h, x) == Approx(g(x)).epsilon(1e-8));
    }
}

TEST_CASE("empirical renewal measure") {
    auto h = RenewalMeasure::empirical({0.5, 1.5, 2.5, 0.7}, 2);
    CHECK(h(0.0) == 1.0);
    CHECK(h(0.6) == 1.5);
    CHECK(h(2.0) == 2.5);
    CHECK(h(10.0) == 3.0);
    double mass = 0.0;
    for (const auto& a : h.atoms) mass += a.mass;
    CHECK(mass == Approx(3.0));
}

TEST_CASE("conv_tail against closed forms and direct quadrature") {
    IncrementModel e1 = model_from_spec("exponential(1)");
    GridOptions opt;
    opt.x_max = 1e3;
    auto g = grid_discretize([](double x) { return std::exp(-x); }, opt);
    for (double x : {0.2, 1.0, 4.0, 15.0}) {
        CHECK(conv_tail(g, e1, x) == Approx(x * std::exp(-x)).epsilon(2e-3));
    }
    // Default positive part against G = Exp(1).
    for (double x : {0.5, 5.0, 50.0}) {
        boost::math::quadrature::tanh_sinh<double> ts;
        const double oracle = ts.integrate(
            [x](double u) { return 0.5 * std::pow(1 + x - u, -1.5) * std::exp(-u); }, 0.0, x);
        CHECK(conv_tail(g, default_model(), x) == Approx(oracle).epsilon(2e-3));
    }
    auto atoms = GridDistribution::from_atoms({{0.0, 0.5}, {2.0, 0.5}});
    CHECK(conv_tail(atoms, e1, 3.0) == Approx(0.5 * std::exp(-3.0) + 0.5 * std::exp(-1.0)));
}

TEST_CASE("self-convolution tail: quadrature and grid routes") {
    IncrementModel e1 = model_from_spec("exponential(1)");
    for (double x : {0.1, 1.0, 10.0, 40.0}) {
        CHECK(self_conv_tail_exact(e1, x) == Approx((1 + x) * std::exp(-x)).epsilon(1e-10));
    }
    IncrementModel p = model_from_spec("pareto(1.5, 1)");
    GridOptions opt;
    opt.points_per_decade = 256;
    opt.x_max = 1e8;
    auto g = grid_discretize([&](double x) { return p.pos_tail(x); }, opt);
    for (double x : {1.0, 10.0, 1e3, 1e5}) {
        CAPTURE(x);
        CHECK(self_conv_tail(g, x) == Approx(self_conv_tail_exact(p, x)).epsilon(1e-3));
    }
    // Subexponential ratio approaches 2.
    CHECK(self_conv_tail_exact(p, 1e6) / p.pos_tail(1e6) == Approx(2.0).epsilon(1e-3));
    // The conditional law is used for defective positive parts.
    CHECK(self_conv_tail_exact(default_model(), 10.0) == Approx(self_conv_tail_exact(p, 10.0)).epsilon(1e-12));
}

TEST_CASE("sstar integral") {
    CHECK(sstar_integral(model_from_spec("point(20)"), 10.0) == Approx(10.0).epsilon(1e-12));
    CHECK(sstar_integral(model_from_spec("exponential(1)"), 6.0) == Approx(6 * std::exp(-6.0)).epsilon(1e-12));
}

TEST_CASE("tail csv output") {
    std::ostringstream out;
    write_tail_csv(out, {1.0, 2.5}, {0.5, 1.0 / 3}, "tail");
    CHECK(out.str() == "x,tail\n1,0.5\n2.5,0.333333333333\n");
}
