#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "htwk/distspec.hpp"
#include "htwk/tailmath.hpp"
#include "htwk/verify.hpp"

using namespace htwk;

namespace {

CheckBlock band_block(std::vector<std::array<double, 2>> cis, std::vector<std::uint64_t> hits = {}) {
    CheckBlock b;
    b.name = "b";
    b.rule.kind = VerdictRule::Kind::band;
    b.rule.band_lo = 0.8;
    b.rule.band_hi = 1.2;
    b.rule.min_conclusive = 2;
    for (std::size_t i = 0; i < cis.size(); ++i) {
        ProbeResult p;
        p.x = double(i + 1);
        p.ratio_lo = cis[i][0];
        p.ratio_hi = cis[i][1];
        p.ratio = 0.5 * (p.ratio_lo + p.ratio_hi);
        p.hits = hits.empty() ? 1000 : hits[i];
        b.probes.push_back(p);
    }
    return b;
}

CheckBlock fixed(Verdict v) {
    CheckBlock b;
    b.rule.kind = VerdictRule::Kind::composite;
    b.precondition = v;
    b.verdict = v;
    return b;
}

const IncrementModel& default_model() {
    static const IncrementModel m = model_from_spec(distspec::default_model_spec);
    return m;
}

}  // namespace

TEST_CASE("band rule: intersect, containment, hits and last_k") {
    auto b = band_block({{0.7, 0.85}, {1.1, 1.3}, {0.9, 1.0}});
    CHECK(recompute_verdict(b) == Verdict::pass);

    b.rule.contain = true;
    CHECK(recompute_verdict(b) == Verdict::fail);
    CHECK(b.probes[0].status == Verdict::fail);
    CHECK(b.probes[2].status == Verdict::pass);

    b.rule.last_k = 1;
    CHECK(recompute_verdict(b) == Verdict::pass);

    auto c = band_block({{0.9, 1.0}, {0.9, 1.0}, {1.3, 1.5}}, {1000, 1000, 10});
    c.rule.min_hits = 50;
    CHECK(recompute_verdict(c) == Verdict::pass);
    CHECK(c.probes[2].status == Verdict::inconclusive);
    c.probes[1].hits = 10;
    CHECK(recompute_verdict(c) == Verdict::inconclusive);
    c.probes[0].ratio_hi = 0.7;
    CHECK(recompute_verdict(c) == Verdict::fail);
}

TEST_CASE("ks, composite and alternatives rules") {
    CheckBlock k;
    k.rule.kind = VerdictRule::Kind::ks;
    CHECK(recompute_verdict(k) == Verdict::inconclusive);
    k.values = {{"ks", 0.01}, {"threshold", 0.02}};
    CHECK(recompute_verdict(k) == Verdict::pass);
    k.rule.expect_exceed = true;
    CHECK(recompute_verdict(k) == Verdict::fail);

    CheckBlock c;
    c.rule.kind = VerdictRule::Kind::composite;
    c.subchecks = {fixed(Verdict::pass), fixed(Verdict::not_applicable)};
    CHECK(recompute_verdict(c) == Verdict::pass);
    c.subchecks.push_back(fixed(Verdict::inconclusive));
    CHECK(recompute_verdict(c) == Verdict::inconclusive);
    c.subchecks.push_back(fixed(Verdict::fail));
    CHECK(recompute_verdict(c) == Verdict::fail);

    CheckBlock a;
    a.rule.kind = VerdictRule::Kind::alternatives;
    a.subchecks = {fixed(Verdict::not_applicable), fixed(Verdict::pass), fixed(Verdict::pass)};
    CHECK(recompute_verdict(a) == Verdict::pass);
    a.subchecks[1] = fixed(Verdict::fail);
    CHECK(recompute_verdict(a) == Verdict::fail);
    a.subchecks[1] = fixed(Verdict::pass);
    a.subchecks[2] = fixed(Verdict::fail);
    CHECK(recompute_verdict(a) == Verdict::fail);
}

TEST_CASE("json round trip reproduces verdicts and bytes") {
    VerificationReport r;
    r.experiment_id = "unit";
    r.model_spec = std::string(distspec::default_model_spec);
    r.seed = 7;
    auto b = band_block({{0.9, 1.1}, {0.95, std::numeric_limits<double>::infinity()}});
    b.values["p_hat"] = 0.25;
    b.curves.push_back(make_limit_diagnostic("c", {1, 2, 3}, {1.0, 1.01, 1.0}, 1.0, 0.05));
    b.subchecks.push_back(fixed(Verdict::not_applicable));
    b.subchecks.back().note = "hypothesis";
    recompute_verdict(b);
    r.blocks.push_back(b);

    const std::string text = r.to_json().dump(2);
    auto back = VerificationReport::from_json(nlohmann::json::parse(text));
    CHECK(back.blocks.size() == 1);
    const Verdict stored = back.blocks[0].verdict;
    CHECK(recompute_verdict(back.blocks[0]) == stored);
    CHECK(std::isinf(back.blocks[0].probes[1].ratio_hi));
    CHECK(back.to_json().dump(2) == text);
    CHECK(nlohmann::json::parse(text)["schema"] == report_schema);
}

TEST_CASE("exit codes count subchecks") {
    VerificationReport r;
    r.blocks.push_back(fixed(Verdict::pass));
    CHECK(exit_code_for(r) == 0);
    r.blocks[0].subchecks.push_back(fixed(Verdict::inconclusive));
    CHECK(exit_code_for(r) == 2);
    r.blocks.push_back(fixed(Verdict::not_applicable));
    CHECK(exit_code_for(r) == 2);
    r.blocks[0].subchecks.push_back(fixed(Verdict::fail));
    CHECK(exit_code_for(r) == 3);
}

TEST_CASE("main theorem block on a light-tailed control is not applicable") {
    const auto m = model_from_spec("mix(0.5: exponential(1), 0.5: neg(exponential(0.5)))");
    ParallelOptions par;
    par.workers = 2;
    MainTheoremOptions opt;
    auto b = main_theorem_report(m, {2, 4, 6, 8}, 200000, par, opt);
    CHECK(b.verdict == Verdict::not_applicable);
    CHECK(b.subchecks[1].verdict == Verdict::not_applicable);
    // The assumption-free lower bound still holds.
    CHECK(b.subchecks[0].verdict == Verdict::pass);
}

TEST_CASE("ladder identity on the default model") {
    ParallelOptions par;
    par.workers = 2;
    auto b = ladder_identity_report(default_model(), 1e3, 20000, par);
    CHECK(b.verdict == Verdict::pass);
    CHECK(b.subchecks[0].verdict == Verdict::pass);
    CHECK(b.values.at("ks") < b.values.at("threshold"));
}

TEST_CASE("theorem 2 report") {
    const std::vector<double> xs = default_probes();
    auto d = theorem2_report(default_model(), xs);
    CHECK(d.values.at("K") == doctest::Approx(1.25).epsilon(1e-8));
    CHECK(d.verdict == Verdict::pass);
    CHECK(d.values.at("case") == 1.0);

    auto div = theorem2_report(model_from_spec("mix(0.5: pareto(0.4,1), 0.5: neg(pareto(0.5,1)))"), xs);
    CHECK(div.verdict == Verdict::not_applicable);
    CHECK(div.note.find("hypothesis violated") != std::string::npos);
}

TEST_CASE("renewal bound rejects m identically zero") {
    const auto m = model_from_spec("pareto(1.5, 1)");
    ParallelOptions par;
    CHECK_THROWS_AS(renewal_bound_report(m, {10, 100}, 100, par), PreconditionError);
}

TEST_CASE("pinned fixtures keep their expected verdicts") {
    std::ifstream in(HTWK_FIXTURE_DIR "/fixtures.json");
    REQUIRE(in);
    const auto fixtures = nlohmann::json::parse(in).at("fixtures");
    for (const auto& f : fixtures) {
        const std::string name = f.at("name");
        CAPTURE(name);
        const auto m = model_from_spec(f.at("model").get<std::string>());
        const auto& expected = f.at("expected");
        if (expected.contains("K_finite")) CHECK(criterion_K(m).finite == expected.at("K_finite").get<bool>());
        if (f.contains("K")) CHECK(criterion_K(m).value == doctest::Approx(f.at("K").get<double>()).epsilon(1e-9));
        const auto t2 = theorem2_report(m, default_probes());
        CHECK(verdict_name(t2.verdict) == expected.at("theorem2").get<std::string>());
        if (expected.contains("theorem2_case")) CHECK(t2.values.at("case") == expected.at("theorem2_case").get<double>());
    }
}
