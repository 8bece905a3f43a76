#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "htwk/walksim.hpp"

using namespace htwk;
using doctest::Approx;

namespace {

const IncrementModel& default_model() {
    static const IncrementModel m = model_from_spec(distspec::default_model_spec);
    return m;
}

ParallelOptions par(std::uint64_t seed, unsigned workers = 1) {
    ParallelOptions o;
    o.seed = seed;
    o.workers = workers;
    return o;
}

}  // namespace

TEST_CASE("negative increments end the cycle at once") {
    auto m = model_from_spec("neg(exponential(1))");
    RngStream a(1, 0), b(1, 0), c(1, 1);
    for (int i = 0; i < 100; ++i) {
        auto cyc = run_cycle(m, a);
        const double xi = sample_increment(m, b);
        CHECK(cyc.tau == 1);
        CHECK(cyc.m_tau == 0.0);
        CHECK(cyc.chi == -xi);
        CHECK(estimate_sup(m, 10.0, c).hit_zero_set);
    }
}

TEST_CASE("positive increments give immediate ladder heights") {
    auto m = model_from_spec("pareto(2, 1)");
    RngStream a(2, 0), b(2, 0);
    for (int i = 0; i < 100; ++i) {
        auto l = sample_ladder_height(m, 10.0, a);
        CHECK(l.eta == 1);
        CHECK_FALSE(l.censored);
        CHECK(l.psi == sample_increment(m, b));
    }
}

TEST_CASE("step budget") {
    RngStream r(3, 0);
    CHECK_THROWS_AS(run_cycle(model_from_spec("exponential(1)"), r, 100), BudgetError);
    CHECK_THROWS_AS(estimate_sup(model_from_spec("exponential(1)"), 1.0, r, 100), BudgetError);
}

TEST_CASE("cycle invariants") {
    auto s = simulate_cycles(default_model(), 100000, par(5));
    for (std::size_t i = 0; i < s.tau.size(); ++i) {
        REQUIRE(s.tau[i] >= 1);
        REQUIRE(s.m_tau[i] >= 0.0);
        REQUIRE(s.chi[i] > 0.0);
    }
    auto t = mtau_tail_estimate(default_model(), {0.0, 1e300}, 100000, par(5));
    CHECK(t.min_s_prev_violations == 0);
    // First-step bound P(M_tau > 0) >= P(xi > 0).
    CHECK(t.ci[0].hi >= default_model().q_plus());
    CHECK(t.hits[1] == 0);
    CHECK(t.ci[1].lo == 0.0);
    CHECK(t.ci[1].hi > 0.0);
}

TEST_CASE("exceedance curve is nonincreasing") {
    auto t = mtau_tail_estimate(default_model(), {1, 10, 100, 1000}, 200000, par(6));
    for (std::size_t j = 1; j < t.hits.size(); ++j) CHECK(t.hits[j] <= t.hits[j - 1]);
}

TEST_CASE("Wald identity on the light fixture") {
    auto m = model_from_spec("mix(0.5: exponential(1), 0.5: neg(exponential(0.5)))");
    auto t = mtau_tail_estimate(m, {1.0}, 400000, par(7), -0.5);
    CHECK(std::abs(t.wald_mean) < 3 * t.wald_se);
}

TEST_CASE("duality E tau * p = 1 and censoring agrees with P(M = 0)") {
    auto t = mtau_tail_estimate(default_model(), {1.0}, 1000000, par(8));
    auto s = sample_sup(default_model(), 200000, 1e4, par(9));
    const double prod = t.tau_mean * s.p_hat;
    const double se = prod * std::sqrt(std::pow(t.tau_se / t.tau_mean, 2) + std::pow(s.p_se / s.p_hat, 2));
    MESSAGE("E tau = " << t.tau_mean << " +- " << t.tau_se << ", p = " << s.p_hat << " +- " << s.p_se);
    CHECK(std::abs(prod - 1.0) < 3 * se);
    CHECK(s.p_hat > 0.0);
    CHECK(s.p_hat < 1.0);

    auto l = sample_ladder_heights(default_model(), 200000, 1e4, par(10));
    const double pl = l.censored_fraction();
    const double sel = std::sqrt(pl * (1 - pl) / l.total);
    CHECK(std::abs(pl - s.p_hat) < 3 * std::hypot(sel, s.p_se));
    for (double psi : l.psi) REQUIRE(psi > 0.0);
}

TEST_CASE("results do not depend on the worker count") {
    auto a = mtau_tail_estimate(default_model(), {1, 10}, 20000, par(11, 1));
    auto b = mtau_tail_estimate(default_model(), {1, 10}, 20000, par(11, 3));
    CHECK(a.hits == b.hits);
    CHECK(a.tau_mean == b.tau_mean);
    CHECK(a.tau_se == b.tau_se);
    auto c = sample_sup(default_model(), 5000, 1e3, par(12, 1));
    auto d = sample_sup(default_model(), 5000, 1e3, par(12, 4));
    CHECK(c.m == d.m);
    auto e = renewal_estimate(default_model(), {10, 100}, 2000, par(13, 1), true);
    auto f = renewal_estimate(default_model(), {10, 100}, 2000, par(13, 2), true);
    CHECK(e.h == f.h);
    CHECK(e.epochs == f.epochs);
    auto g = mtau_tail_estimate(default_model(), {1, 10}, 20000, par(14, 1));
    CHECK(g.hits != a.hits);
}

TEST_CASE("worker count from the environment") {
    setenv("HTWK_WORKERS", "3", 1);
    CHECK(resolve_workers(0) == 3);
    CHECK(resolve_workers(5) == 5);
    setenv("HTWK_WORKERS", "zero", 1);
    CHECK_THROWS_AS(resolve_workers(0), PreconditionError);
    unsetenv("HTWK_WORKERS");
    CHECK(resolve_workers(0) >= 1);
}

TEST_CASE("renewal function") {
    auto r = renewal_estimate(default_model(), {-1.0, 0.0, 10.0, 100.0, 1000.0}, 4000, par(15));
    CHECK(r.h[0] == 0.0);
    CHECK(r.h[1] == 1.0);
    for (std::size_t j = 2; j < r.h.size(); ++j) CHECK(r.h[j] >= r.h[j - 1]);
    // Infinite-mean ladder heights: sub-linear growth.
    CHECK(r.h[3] / 100.0 < r.h[2] / 10.0);
    CHECK(r.h[4] / 1000.0 < r.h[3] / 100.0);
}

TEST_CASE("renewal functional counts the zero epoch") {
    auto r = renewal_functional(default_model(), {0.0, 5.0}, 500, 0.0,
                                [](double t, double x) { return t == 0.0 ? 1.0 + x : 0.0; }, par(16));
    CHECK(r.mean[0] == 1.0);
    CHECK(r.mean[1] == 6.0);
}

TEST_CASE("KS distance") {
    CHECK(ks_distance({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(ks_distance({1, 2, 3}, {4, 5, 6}) == 1.0);
    CHECK(ks_distance({1, 2, 3, 4}, {3, 4, 5, 6}) == Approx(0.5));
    CHECK(ks_distance({0, 0, 1}, {0, 1, 1}) == Approx(1.0 / 3));
}

TEST_CASE("Wilson interval") {
    auto w = wilson_interval(50, 100);
    CHECK(w.lo == Approx(0.4038).epsilon(1e-3));
    CHECK(w.hi == Approx(0.5962).epsilon(1e-3));
    CHECK(wilson_interval(0, 100).lo == 0.0);
    CHECK(wilson_interval(0, 100).hi == Approx(0.037).epsilon(0.01));
    CHECK(wilson_interval(100, 100).hi == 1.0);
}

TEST_CASE("geometric sums") {
    auto z = sample_geometric_sums(default_model(), 1000, 1.0, 1e3, par(17), stream_tag::geometric_sum);
    for (double v : z) CHECK(v == 0.0);
    auto g = sample_geometric_sums(default_model(), 20000, 0.5, 1e3, par(18), stream_tag::geometric_sum);
    std::size_t zeros = 0;
    for (double v : g) zeros += v == 0.0;
    CHECK(std::abs(zeros / 20000.0 - 0.5) < 3 * std::sqrt(0.25 / 20000));
}

TEST_CASE("cycle file round trip") {
    auto s = simulate_cycles(default_model(), 1000, par(19));
    std::stringstream buf;
    write_cycles(buf, s);
    const std::string bytes = buf.str();
    CHECK(bytes.size() == 5 + 16 + 3 * 8 * 1000);
    CHECK(bytes.substr(0, 5) == "HTWK1");
    CHECK(static_cast<unsigned char>(bytes[5]) == (1000 & 0xff));
    CHECK(static_cast<unsigned char>(bytes[13]) == 19);
    auto back = read_cycles(buf);
    CHECK(back.seed == 19);
    CHECK(back.tau == s.tau);
    CHECK(back.m_tau == s.m_tau);
    CHECK(back.chi == s.chi);
    std::stringstream bad("HTWK2");
    CHECK_THROWS_AS(read_cycles(bad), Error);
}
