#include "htwk/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "htwk/tailmath.hpp"

namespace htwk {

using nlohmann::json;

namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr double kInf = std::numeric_limits<double>::infinity();

json num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double num(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        return std::numeric_limits<double>::quiet_NaN();
    }
    return j.get<double>();
}

std::string_view rule_name(VerdictRule::Kind k) {
    switch (k) {
        case VerdictRule::Kind::band: return "band";
        case VerdictRule::Kind::ks: return "ks";
        case VerdictRule::Kind::curves: return "curves";
        case VerdictRule::Kind::composite: return "composite";
        case VerdictRule::Kind::alternatives: return "alternatives";
    }
    return "?";
}

VerdictRule::Kind parse_rule(const std::string& s) {
    if (s == "band") return VerdictRule::Kind::band;
    if (s == "ks") return VerdictRule::Kind::ks;
    if (s == "curves") return VerdictRule::Kind::curves;
    if (s == "composite") return VerdictRule::Kind::composite;
    if (s == "alternatives") return VerdictRule::Kind::alternatives;
    throw Error("unknown verdict rule '" + s + "'");
}

Verdict combine(const std::vector<Verdict>& vs) {
    bool inconclusive = false;
    for (Verdict v : vs) {
        if (v == Verdict::fail) return Verdict::fail;
        inconclusive = inconclusive || v == Verdict::inconclusive;
    }
    return inconclusive ? Verdict::inconclusive : Verdict::pass;
}

void collect(const CheckBlock& b, std::vector<Verdict>& out) {
    out.push_back(b.verdict);
    for (const auto& s : b.subchecks) collect(s, out);
}

}  // namespace

std::string_view verdict_name(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
        case Verdict::not_applicable: return "not_applicable";
    }
    return "?";
}

Verdict parse_verdict(std::string_view name) {
    if (name == "pass") return Verdict::pass;
    if (name == "fail") return Verdict::fail;
    if (name == "inconclusive") return Verdict::inconclusive;
    if (name == "not_applicable") return Verdict::not_applicable;
    throw Error("unknown verdict '" + std::string(name) + "'");
}

// ---------------------------------------------------------------- verdicts

Verdict recompute_verdict(CheckBlock& b) {
    for (auto& s : b.subchecks) recompute_verdict(s);
    const VerdictRule& r = b.rule;
    Verdict v = Verdict::inconclusive;
    switch (r.kind) {
        case VerdictRule::Kind::band: {
            const std::size_t n = b.probes.size();
            const std::size_t first = r.last_k > 0 && r.last_k < n ? n - r.last_k : 0;
            std::size_t conclusive = 0;
            bool failed = false;
            for (std::size_t i = 0; i < n; ++i) {
                auto& p = b.probes[i];
                if (r.min_hits > 0 && p.hits < r.min_hits) {
                    p.status = Verdict::inconclusive;
                } else {
                    const bool ok = r.contain ? (p.ratio_lo >= r.band_lo && p.ratio_hi <= r.band_hi)
                                              : (p.ratio_hi >= r.band_lo && p.ratio_lo <= r.band_hi);
                    p.status = ok ? Verdict::pass : Verdict::fail;
                }
                if (i < first) continue;
                if (p.status != Verdict::inconclusive) ++conclusive;
                failed = failed || p.status == Verdict::fail;
            }
            const std::size_t need = std::min(r.min_conclusive, n - first);
            if (failed) {
                v = Verdict::fail;
            } else if (n == 0 || conclusive < need) {
                v = Verdict::inconclusive;
            } else {
                v = Verdict::pass;
            }
            break;
        }
        case VerdictRule::Kind::ks: {
            auto ks = b.values.find("ks");
            auto th = b.values.find("threshold");
            if (ks == b.values.end() || th == b.values.end()) {
                v = Verdict::inconclusive;
            } else {
                v = (r.expect_exceed ? ks->second > th->second : ks->second < th->second) ? Verdict::pass
                                                                                        : Verdict::fail;
            }
            break;
        }
        case VerdictRule::Kind::curves: {
            bool ok = !b.curves.empty();
            for (auto& c : b.curves) {
                c.evaluate();
                ok = ok && c.pass;
            }
            v = ok ? Verdict::pass : Verdict::fail;
            break;
        }
        case VerdictRule::Kind::composite: {
            std::vector<Verdict> vs;
            for (const auto& s : b.subchecks) {
                if (s.verdict != Verdict::not_applicable) vs.push_back(s.verdict);
            }
            v = vs.empty() ? Verdict::inconclusive : combine(vs);
            break;
        }
        case VerdictRule::Kind::alternatives: {
            if (b.subchecks.size() < 2) {
                v = Verdict::inconclusive;
                break;
            }
            const Verdict a = b.subchecks[0].verdict;
            const Verdict c = b.subchecks[1].verdict;
            std::vector<Verdict> vs;
            if (a == Verdict::pass || c == Verdict::pass) {
                vs.push_back(Verdict::pass);
            } else if (a == Verdict::inconclusive || c == Verdict::inconclusive) {
                vs.push_back(Verdict::inconclusive);
            } else {
                vs.push_back(Verdict::fail);
            }
            for (std::size_t i = 2; i < b.subchecks.size(); ++i) vs.push_back(b.subchecks[i].verdict);
            v = combine(vs);
            break;
        }
    }
    if (b.precondition) v = *b.precondition;
    b.verdict = v;
    return v;
}

// ---------------------------------------------------------------- json

json CheckBlock::to_json() const {
    json j;
    j["name"] = name;
    j["anchor"] = anchor;
    j["seed"] = seed;
    j["rule"] = {{"kind", rule_name(rule.kind)},
                 {"band_lo", num(rule.band_lo)},
                 {"band_hi", num(rule.band_hi)},
                 {"contain", rule.contain},
                 {"min_hits", rule.min_hits},
                 {"min_conclusive", rule.min_conclusive},
                 {"last_k", rule.last_k},
                 {"expect_exceed", rule.expect_exceed}};
    j["probes"] = json::array();
    for (const auto& p : probes) {
        j["probes"].push_back({{"x", num(p.x)},
                               {"simulated", num(p.simulated)},
                               {"sim_lo", num(p.sim_lo)},
                               {"sim_hi", num(p.sim_hi)},
                               {"analytic", num(p.analytic)},
                               {"ratio", num(p.ratio)},
                               {"ratio_lo", num(p.ratio_lo)},
                               {"ratio_hi", num(p.ratio_hi)},
                               {"hits", p.hits},
                               {"status", verdict_name(p.status)}});
    }
    j["values"] = json::object();
    for (const auto& [k, v] : values) j["values"][k] = num(v);
    j["tolerances"] = json::object();
    for (const auto& [k, v] : tolerances) j["tolerances"][k] = num(v);
    j["curves"] = json::array();
    for (const auto& c : curves) {
        json cj = c.to_json();
        cj["ratios"] = json::array();
        for (double r : c.ratios) cj["ratios"].push_back(num(r));
        j["curves"].push_back(std::move(cj));
    }
    j["subchecks"] = json::array();
    for (const auto& s : subchecks) j["subchecks"].push_back(s.to_json());
    j["precondition"] = precondition ? json(verdict_name(*precondition)) : json(nullptr);
    j["note"] = note;
    j["verdict"] = verdict_name(verdict);
    return j;
}

CheckBlock CheckBlock::from_json(const json& j) {
    CheckBlock b;
    b.name = j.at("name").get<std::string>();
    b.anchor = j.at("anchor").get<std::string>();
    b.seed = j.at("seed").get<std::uint64_t>();
    const json& r = j.at("rule");
    b.rule.kind = parse_rule(r.at("kind").get<std::string>());
    b.rule.band_lo = num(r.at("band_lo"));
    b.rule.band_hi = num(r.at("band_hi"));
    b.rule.contain = r.at("contain").get<bool>();
    b.rule.min_hits = r.at("min_hits").get<std::uint64_t>();
    b.rule.min_conclusive = r.at("min_conclusive").get<std::size_t>();
    b.rule.last_k = r.at("last_k").get<std::size_t>();
    b.rule.expect_exceed = r.at("expect_exceed").get<bool>();
    for (const auto& p : j.at("probes")) {
        ProbeResult q;
        q.x = num(p.at("x"));
        q.simulated = num(p.at("simulated"));
        q.sim_lo = num(p.at("sim_lo"));
        q.sim_hi = num(p.at("sim_hi"));
        q.analytic = num(p.at("analytic"));
        q.ratio = num(p.at("ratio"));
        q.ratio_lo = num(p.at("ratio_lo"));
        q.ratio_hi = num(p.at("ratio_hi"));
        q.hits = p.at("hits").get<std::uint64_t>();
        q.status = parse_verdict(p.at("status").get<std::string>());
        b.probes.push_back(q);
    }
    for (const auto& [k, v] : j.at("values").items()) b.values[k] = num(v);
    for (const auto& [k, v] : j.at("tolerances").items()) b.tolerances[k] = num(v);
    for (const auto& c : j.at("curves")) {
        json copy = c;
        std::vector<double> ratios;
        for (const auto& r : c.at("ratios")) ratios.push_back(num(r));
        copy["ratios"] = json::array();
        RatioDiagnostic d = RatioDiagnostic::from_json(copy);
        d.ratios = std::move(ratios);
        b.curves.push_back(std::move(d));
    }
    for (const auto& s : j.at("subchecks")) b.subchecks.push_back(from_json(s));
    if (!j.at("precondition").is_null()) b.precondition = parse_verdict(j.at("precondition").get<std::string>());
    b.note = j.at("note").get<std::string>();
    b.verdict = parse_verdict(j.at("verdict").get<std::string>());
    return b;
}

json VerificationReport::to_json() const {
    json j;
    j["schema"] = report_schema;
    j["experiment"] = experiment_id;
    j["model"] = model_spec;
    j["seed"] = seed;
    j["blocks"] = json::array();
    for (const auto& b : blocks) j["blocks"].push_back(b.to_json());
    std::vector<Verdict> all;
    for (const auto& b : blocks) collect(b, all);
    std::vector<Verdict> counted;
    for (Verdict v : all) {
        if (v != Verdict::not_applicable) counted.push_back(v);
    }
    j["verdict"] = verdict_name(counted.empty() ? Verdict::inconclusive : combine(counted));
    return j;
}

VerificationReport VerificationReport::from_json(const json& j) {
    if (j.at("schema").get<std::string>() != report_schema) throw Error("unsupported report schema");
    VerificationReport r;
    r.experiment_id = j.at("experiment").get<std::string>();
    r.model_spec = j.at("model").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& b : j.at("blocks")) r.blocks.push_back(CheckBlock::from_json(b));
    return r;
}

int exit_code_for(const VerificationReport& report) {
    std::vector<Verdict> all;
    for (const auto& b : report.blocks) collect(b, all);
    bool inconclusive = false;
    for (Verdict v : all) {
        if (v == Verdict::fail) return 3;
        inconclusive = inconclusive || v == Verdict::inconclusive;
    }
    return inconclusive ? 2 : 0;
}

// ---------------------------------------------------------------- main theorem

CheckBlock main_theorem_report(const IncrementModel& model, const std::vector<double>& xs, std::size_t cycles,
                               const ParallelOptions& par, const MainTheoremOptions& opt) {
    CheckBlock b;
    b.name = "main_theorem";
    b.anchor = "Theorem 1: P(M_tau > x) ~ E tau F(x)";
    b.seed = par.seed;
    b.rule.kind = VerdictRule::Kind::band;
    b.rule.band_lo = 1.0 - opt.tol;
    b.rule.band_hi = 1.0 + opt.tol;
    b.rule.min_hits = opt.min_hits;
    b.rule.min_conclusive = opt.min_conclusive;
    b.tolerances["tol"] = opt.tol;
    b.tolerances["min_hits"] = static_cast<double>(opt.min_hits);

    bool hypotheses = model.infinite_negative_mean();
    if (hypotheses) {
        const KResult k = criterion_K(model);
        b.values["K"] = k.value;
        hypotheses = k.finite;
    }
    if (!hypotheses) {
        b.precondition = Verdict::not_applicable;
        b.note = "hypotheses not met (needs E xi^- infinite and K finite); curve reported as a control";
    } else if (!xs.empty() && !(model.pos_tail(xs.back()) > 0.0)) {
        hypotheses = false;
        b.precondition = Verdict::not_applicable;
        b.note = "F vanishes at the probes; no heavy right tail to compare with";
    }

    const MtauTail t = mtau_tail_estimate(model, xs, cycles, par);
    double tau_mean = t.tau_mean;
    double tau_se = t.tau_se;
    if (opt.independent_pools) {
        ParallelOptions other = par;
        other.seed = par.seed ^ 0x9e3779b97f4a7c15ULL;
        const MtauTail u = mtau_tail_estimate(model, {}, cycles, other);
        tau_mean = u.tau_mean;
        tau_se = u.tau_se;
    }
    b.values["cycles"] = static_cast<double>(cycles);
    b.values["tau_mean"] = tau_mean;
    b.values["tau_se"] = tau_se;
    b.values["independent_pools"] = opt.independent_pools ? 1.0 : 0.0;

    const double tau_lo = tau_mean - kZ95 * tau_se;
    const double tau_hi = tau_mean + kZ95 * tau_se;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        ProbeResult p;
        p.x = xs[j];
        const double f = model.pos_tail(xs[j]);
        p.simulated = t.p_hat[j];
        p.sim_lo = t.ci[j].lo;
        p.sim_hi = t.ci[j].hi;
        p.analytic = tau_mean * f;
        if (f > 0.0) {
            p.ratio = p.simulated / p.analytic;
            // Log-scale half-widths of both estimates added (they share cycles).
            p.ratio_lo = p.sim_lo / (tau_hi * f);
            p.ratio_hi = tau_lo > 0 ? p.sim_hi / (tau_lo * f) : kInf;
        } else {
            p.ratio = p.simulated > 0 ? kInf : std::numeric_limits<double>::quiet_NaN();
            p.ratio_lo = p.sim_lo > 0 ? kInf : 0.0;
            p.ratio_hi = kInf;
        }
        p.hits = t.hits[j];
        b.probes.push_back(p);
    }

    CheckBlock lower = b;
    lower.name = "lower_bound";
    lower.anchor = "Lemma 9: P(M_tau > x) >= (1 - o(1)) E tau F(x) without assumptions";
    lower.rule.band_hi = kInf;
    lower.rule.min_conclusive = 1;
    lower.precondition.reset();
    lower.note.clear();
    lower.values.clear();
    lower.subchecks.clear();

    CheckBlock weak;
    weak.name = "weak_equivalence";
    weak.anchor = "integral of F(x - u) P(M in du) over [0, x] ~ F(x)";
    weak.seed = par.seed;
    weak.rule.kind = VerdictRule::Kind::curves;
    weak.tolerances["tol"] = opt.tol;
    if (hypotheses) {
        const SupSample s = sample_sup(model, opt.sup_samples, opt.barrier, par);
        const GridDistribution pi = GridDistribution::empirical(s.m);
        std::vector<double> r;
        for (double x : xs) r.push_back(conv_tail(pi, model, x) / model.pos_tail(x));
        weak.curves.push_back(make_limit_diagnostic("weak_equivalence", xs, r, 1.0, opt.tol));
        weak.values["samples"] = static_cast<double>(opt.sup_samples);
        weak.values["barrier"] = opt.barrier;
        weak.values["p_hat"] = s.p_hat;
        weak.values["escape_estimate"] = s.escape_estimate;
        weak.values["bias_flag"] = s.bias_flag ? 1.0 : 0.0;
    } else {
        weak.precondition = Verdict::not_applicable;
        weak.note = "hypotheses not met";
    }

    b.subchecks.push_back(std::move(lower));
    b.subchecks.push_back(std::move(weak));
    recompute_verdict(b);
    return b;
}

// ---------------------------------------------------------------- renewal band

CheckBlock renewal_bound_report(const IncrementModel& model, const std::vector<double>& xs, std::size_t reps,
                                const ParallelOptions& par, const RenewalBoundOptions& opt) {
    const TruncatedMean m(model);
    if (m.identically_zero()) throw PreconditionError("renewal bound needs a nonzero negative part (m = 0)");

    CheckBlock b;
    b.name = "renewal_bound";
    b.anchor = "Proposition p1: p <= liminf H_(x) m(x) / x <= limsup <= 2p";
    b.seed = par.seed;
    const SupSample s = sample_sup(model, opt.sup_samples, opt.barrier, par);
    const WilsonInterval pci = wilson_interval(s.zeros, s.m.size());
    b.values["p_hat"] = s.p_hat;
    b.values["p_ci_lo"] = pci.lo;
    b.values["p_ci_hi"] = pci.hi;
    b.values["reps"] = static_cast<double>(reps);
    b.values["bias_flag"] = s.bias_flag ? 1.0 : 0.0;
    b.tolerances["tol"] = opt.tol;
    b.rule.kind = VerdictRule::Kind::band;
    b.rule.band_lo = s.p_hat * (1.0 - opt.tol);
    b.rule.band_hi = s.p_hat * (2.0 + opt.tol);
    b.rule.contain = true;
    b.rule.last_k = opt.last_k;
    b.rule.min_conclusive = opt.last_k;
    if (pci.lo <= 0.0 || pci.hi >= 1.0) {
        b.precondition = Verdict::inconclusive;
        b.note = "confidence interval of p reaches 0 or 1";
    }

    const RenewalEstimate r = renewal_estimate(model, xs, reps, par);
    double min_b = kInf;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        ProbeResult p;
        p.x = xs[j];
        p.simulated = r.h[j];
        p.sim_lo = r.h[j] - kZ95 * r.se[j];
        p.sim_hi = r.h[j] + kZ95 * r.se[j];
        p.analytic = m.ratio(xs[j]);
        p.ratio = r.h[j] / p.analytic;
        p.ratio_lo = p.sim_lo / p.analytic;
        p.ratio_hi = p.sim_hi / p.analytic;
        min_b = std::min(min_b, p.ratio);
        b.probes.push_back(p);
    }
    b.values["min_ratio"] = min_b;
    recompute_verdict(b);
    return b;
}

// ---------------------------------------------------------------- geometric sums

CheckBlock ladder_identity_report(const IncrementModel& model, double barrier, std::size_t n,
                                  const ParallelOptions& par) {
    CheckBlock b;
    b.name = "ladder_identity";
    b.anchor = "Eq. Msum: M = psi_1 + ... + psi_nu, P(nu = n) = p (1 - p)^n";
    b.seed = par.seed;
    b.rule.kind = VerdictRule::Kind::ks;
    const double threshold = 1.36 * std::sqrt(2.0 / static_cast<double>(n));
    b.tolerances["ks_coefficient"] = 1.36;

    const SupSample direct = sample_sup(model, n, barrier, par);
    const double p = direct.p_hat;
    b.values["n"] = static_cast<double>(n);
    b.values["barrier"] = barrier;
    b.values["p_hat"] = p;
    b.values["p_se"] = direct.p_se;
    b.values["threshold"] = threshold;
    b.values["escape_estimate"] = direct.escape_estimate;

    CheckBlock control;
    control.name = "ladder_identity_control";
    control.anchor = b.anchor;
    control.note = "geometric sum with p/2; the distance must exceed the threshold";
    control.seed = par.seed;
    control.rule.kind = VerdictRule::Kind::ks;
    control.rule.expect_exceed = true;
    control.values["threshold"] = threshold;

    if (!(p > 0.0 && p < 1.0)) {
        b.precondition = Verdict::inconclusive;
        b.note = "p_hat is 0 or 1";
        control.precondition = Verdict::inconclusive;
        b.subchecks.push_back(std::move(control));
        recompute_verdict(b);
        return b;
    }

    const std::vector<double> sums = sample_geometric_sums(model, n, p, barrier, par, stream_tag::geometric_sum);
    b.values["ks"] = ks_distance(direct.m, sums);
    const double zeros = static_cast<double>(std::count(sums.begin(), sums.end(), 0.0));
    b.values["zero_fraction_direct"] = p;
    b.values["zero_fraction_sum"] = zeros / static_cast<double>(n);

    const LadderBatch ladder = sample_ladder_heights(model, n, barrier, par);
    const double cf = ladder.censored_fraction();
    const double se = std::hypot(direct.p_se, std::sqrt(cf * (1 - cf) / static_cast<double>(ladder.total)));
    const bool consistent = std::abs(cf - p) <= 3.0 * se;
    b.values["censored_fraction"] = cf;
    b.values["bias_flag"] = (direct.bias_flag || !consistent) ? 1.0 : 0.0;
    if (!consistent) b.note = "censoring rate of the ladder sampler disagrees with P(M = 0)";

    const std::vector<double> wrong =
        sample_geometric_sums(model, n, 0.5 * p, barrier, par, stream_tag::geometric_sum_control);
    control.values["ks"] = ks_distance(direct.m, wrong);
    control.values["p_used"] = 0.5 * p;
    b.subchecks.push_back(std::move(control));
    recompute_verdict(b);
    return b;
}

// ---------------------------------------------------------------- ladder tail

CheckBlock gplus_tail_report(const IncrementModel& model, const std::vector<double>& xs, std::size_t reps,
                             const ParallelOptions& par, const GplusOptions& opt) {
    CheckBlock b;
    b.name = "ladder_height_tail";
    b.anchor = "Eq. psiH: G+(x) = (1 / (1 - p)) integral of F(u + x) H_(du)";
    b.seed = par.seed;
    b.rule.kind = VerdictRule::Kind::band;
    b.rule.band_lo = 1.0 - opt.tol;
    b.rule.band_hi = 1.0 + opt.tol;
    b.rule.min_hits = opt.min_hits;
    b.rule.min_conclusive = std::min<std::size_t>(3, xs.size());
    b.tolerances["tol"] = opt.tol;
    b.tolerances["min_hits"] = static_cast<double>(opt.min_hits);

    LadderBatch ladder = sample_ladder_heights(model, opt.ladder_samples, opt.barrier, par);
    std::sort(ladder.psi.begin(), ladder.psi.end());
    const WilsonInterval pci = wilson_interval(ladder.censored, ladder.total);
    const double p = ladder.censored_fraction();
    b.values["p_hat"] = p;
    b.values["p_ci_lo"] = pci.lo;
    b.values["p_ci_hi"] = pci.hi;
    b.values["ladder_samples"] = static_cast<double>(ladder.total);
    b.values["uncensored"] = static_cast<double>(ladder.psi.size());
    b.values["reps"] = static_cast<double>(reps);
    b.values["horizon"] = opt.horizon;
    if (ladder.psi.empty() || pci.hi >= 1.0) {
        b.precondition = Verdict::inconclusive;
        b.note = "no uncensored ladder heights";
        recompute_verdict(b);
        return b;
    }

    const RenewalFunctional h = renewal_functional(
        model, xs, reps, opt.horizon, [&](double t, double x) { return model.pos_tail(t + x); }, par);
    const std::size_t total = ladder.psi.size();
    for (std::size_t j = 0; j < xs.size(); ++j) {
        ProbeResult q;
        q.x = xs[j];
        const auto above = static_cast<std::uint64_t>(
            ladder.psi.end() - std::upper_bound(ladder.psi.begin(), ladder.psi.end(), xs[j]));
        const WilsonInterval e = wilson_interval(above, total);
        q.hits = above;
        q.simulated = static_cast<double>(above) / static_cast<double>(total);
        q.sim_lo = e.lo;
        q.sim_hi = e.hi;
        q.analytic = h.mean[j] / (1.0 - p);
        const double a_lo = std::max(0.0, h.mean[j] - kZ95 * h.se[j]) / (1.0 - pci.lo);
        const double a_hi = (h.mean[j] + kZ95 * h.se[j]) / (1.0 - pci.hi);
        q.ratio = q.simulated / q.analytic;
        q.ratio_lo = e.lo / a_hi;
        q.ratio_hi = a_lo > 0 ? e.hi / a_lo : kInf;
        b.probes.push_back(q);
    }
    recompute_verdict(b);
    return b;
}

// ---------------------------------------------------------------- Theorem 2

CheckBlock theorem2_report(const IncrementModel& model, const std::vector<double>& xs, const Theorem2Options& opt) {
    CheckBlock b;
    b.name = "theorem2";
    b.anchor = "Theorem 2: F in S* or F in L and D, with K finite, gives G_1 in S_F";
    b.rule.kind = VerdictRule::Kind::alternatives;
    b.tolerances["tol"] = opt.tol;

    auto hypothesis_violated = [&](const std::string& why) {
        b.precondition = Verdict::not_applicable;
        b.note = "Theorem 2 hypothesis violated: " + why;
        recompute_verdict(b);
        return b;
    };
    if (!model.infinite_negative_mean()) return hypothesis_violated("E xi^- is finite");
    if (!xs.empty() && !(model.pos_tail(xs.back()) > 0.0)) {
        return hypothesis_violated("F vanishes at the probes, so it is in neither S* nor L");
    }
    const KResult k = criterion_K(model);
    b.values["K"] = k.value;
    b.values["K_finite"] = k.finite ? 1.0 : 0.0;
    if (!k.finite) return hypothesis_violated("K is infinite");

    CheckBlock a;
    a.name = "class_Sstar";
    a.anchor = "case (a): F in S*";
    a.rule.kind = VerdictRule::Kind::curves;
    try {
        a.curves.push_back(membership_curve(MembershipKind::Sstar, model, nullptr, xs, opt.membership));
    } catch (const DivergenceError&) {
        a.precondition = Verdict::not_applicable;
        a.note = "mu_+ is infinite";
    }
    recompute_verdict(a);

    CheckBlock ld;
    ld.name = "class_L_and_D";
    ld.anchor = "case (b): F in L and D";
    ld.rule.kind = VerdictRule::Kind::curves;
    ld.curves.push_back(membership_curve(MembershipKind::L, model, nullptr, xs, opt.membership));
    ld.curves.push_back(membership_curve(MembershipKind::D, model, nullptr, xs, opt.membership));
    recompute_verdict(ld);

    const G1Tail g1(model, k.value);
    const GridDistribution grid = g1_grid(g1, probe_knots(xs.back()));
    const SstarCriterionResult crit = sstar_criterion_for_G(model, grid, xs, opt.tol);

    CheckBlock sf;
    sf.name = "G1_in_SF";
    sf.anchor = "G_1 in S_F";
    sf.rule.kind = VerdictRule::Kind::curves;
    sf.curves.push_back(crit.sf);
    sf.curves.back().name = "G1_SF";
    recompute_verdict(sf);

    CheckBlock inc;
    inc.name = "G1_unit_increment";
    inc.anchor = "Lemma 5: G(x - 1, x] = o(F(x))";
    inc.rule.kind = VerdictRule::Kind::curves;
    inc.curves.push_back(crit.small_increments);
    inc.curves.back().name = "G1_unit_increment";
    recompute_verdict(inc);

    b.values["case"] = a.verdict == Verdict::pass ? 1.0 : (ld.verdict == Verdict::pass ? 2.0 : 0.0);
    b.subchecks = {std::move(a), std::move(ld), std::move(sf), std::move(inc)};
    recompute_verdict(b);
    return b;
}

}  // namespace htwk
