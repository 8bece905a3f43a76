#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "htwk/distspec.hpp"
#include "htwk/rng.hpp"

using namespace htwk;
using namespace htwk::distspec;

namespace {

ParseErrorKind error_kind(std::string_view text) {
    try {
        parse_spec(text);
    } catch (const ParseError& e) {
        return e.kind();
    }
    FAIL("expected a parse error for " << text);
    return ParseErrorKind::syntax;
}

// Random well-formed expression; neg children are kept nonnegative.
DistExpr random_expr(RngStream& rng, int depth, bool nonneg) {
    const double u = rng.uniform();
    auto real = [&](double lo, double hi) {
        // Short decimals so that printing and parsing are exercised on varied
        // magnitudes, plus a few values that need all 17 digits.
        double v = lo + (hi - lo) * rng.uniform();
        return rng.uniform() < 0.5 ? std::round(v * 1000.0) / 1000.0 + 0.001 : v;
    };
    if (depth == 0 || u < 0.4) {
        switch (static_cast<int>(rng.uniform() * 5)) {
            case 0: return pareto(real(0.1, 4), real(0.1, 10));
            case 1: return lognormal(real(-2, 2), real(0.1, 3));
            case 2: return weibull(real(0.2, 3), real(0.1, 5));
            case 3: return exponential(real(0.1, 5));
            default: return point(nonneg ? real(0, 5) : real(-5, 5));
        }
    }
    if (u < 0.55 && !nonneg) return neg(random_expr(rng, depth - 1, true));
    if (u < 0.7) return shift(nonneg ? real(0, 3) : real(-3, 3), random_expr(rng, depth - 1, nonneg));
    const int n = 2 + static_cast<int>(rng.uniform() * 3);
    std::vector<std::pair<double, DistExpr>> parts;
    for (int i = 0; i < n; ++i) parts.emplace_back(1.0 / n, random_expr(rng, depth - 1, nonneg));
    // Weights that sum to one exactly in binary are not needed: the
    // tolerance is 1e-12.
    return mix(std::move(parts));
}

}  // namespace

TEST_CASE("default model parses to the expected tree") {
    DistExpr e = parse_spec(default_model_spec);
    REQUIRE(e.kind == NodeKind::mix);
    REQUIRE(e.children.size() == 2);
    CHECK(e.weights == std::vector<double>{0.5, 0.5});
    CHECK(e.children[0] == pareto(1.5, 1.0));
    CHECK(e.children[1] == neg(pareto(0.5, 1.0)));
    CHECK(format_spec(e) == default_model_spec);
}

TEST_CASE("positional and named parameters are interchangeable") {
    CHECK(parse_spec("pareto(1.5, 1)") == parse_spec("pareto(alpha=1.5, kappa=1)"));
    CHECK(parse_spec("pareto(kappa=1, alpha=1.5)") == pareto(1.5, 1.0));
    CHECK(parse_spec("  weibull( 0.5 ,scale = 2e0 ) ") == weibull(0.5, 2.0));
    CHECK(parse_spec("shift(-1.5, exponential(2))") == shift(-1.5, exponential(2.0)));
    CHECK(parse_spec("point(c=-3)") == point(-3.0));
}

TEST_CASE("spans locate subexpressions") {
    const std::string text = "mix(0.5: point(1), 0.5: neg(pareto(0.5, 1)))";
    DistExpr e = parse_spec(text);
    const auto& inner = e.children[1].children[0];
    CHECK(text.substr(inner.span.start, inner.span.end - inner.span.start) == "pareto(0.5, 1)");
    CHECK(e.span.start == 0);
    CHECK(e.span.end == text.size());
}

TEST_CASE("error categories") {
    CHECK(error_kind("") == ParseErrorKind::syntax);
    CHECK(error_kind("pareto(1.5") == ParseErrorKind::syntax);
    CHECK(error_kind("pareto(1.5, 1) x") == ParseErrorKind::syntax);
    CHECK(error_kind("pareto(1.5, 1, 2)") == ParseErrorKind::syntax);
    CHECK(error_kind("pareto(1+1, 1)") == ParseErrorKind::syntax);
    CHECK(error_kind("gamma(1, 2)") == ParseErrorKind::unknown_name);
    CHECK(error_kind("pareto(beta=1, kappa=1)") == ParseErrorKind::unknown_name);
    CHECK(error_kind("pareto(-1, 1)") == ParseErrorKind::bad_domain);
    CHECK(error_kind("pareto(1, 0)") == ParseErrorKind::bad_domain);
    CHECK(error_kind("lognormal(0, 0)") == ParseErrorKind::bad_domain);
    CHECK(error_kind("exponential(0)") == ParseErrorKind::bad_domain);
    CHECK(error_kind("mix(0.3: point(1), 0.3: point(2))") == ParseErrorKind::bad_weights);
    CHECK(error_kind("mix(1.2: point(1), -0.2: point(2))") == ParseErrorKind::bad_weights);
    CHECK(error_kind("neg(point(-1))") == ParseErrorKind::bad_support);
    CHECK(error_kind("neg(neg(pareto(1, 1)))") == ParseErrorKind::bad_support);
    CHECK(error_kind("neg(shift(-0.5, exponential(1)))") == ParseErrorKind::bad_support);
}

TEST_CASE("error spans point into the text") {
    try {
        parse_spec("mix(0.5: point(1), 0.5: gamma(2))");
        FAIL("no error");
    } catch (const ParseError& e) {
        CHECK(e.kind() == ParseErrorKind::unknown_name);
        CHECK(e.span().start == 24);
    }
}

TEST_CASE("support lower bound") {
    CHECK(support_lower(pareto(1, 1)) == 0.0);
    CHECK(support_lower(shift(2, exponential(1))) == 2.0);
    CHECK(support_lower(point(-1)) == -1.0);
    CHECK(std::isinf(support_lower(parse_spec(default_model_spec))));
}

TEST_CASE("printing round-trips on random expressions") {
    RngStream rng(2024, 7);
    for (int i = 0; i < 500; ++i) {
        DistExpr e = random_expr(rng, 4, false);
        CAPTURE(format_spec(e));
        validate(e);
        const std::string once = format_spec(e);
        DistExpr back = parse_spec(once);
        CHECK(back == e);
        CHECK(format_spec(back) == once);
    }
}
