#include "htwk/classlab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace htwk {

// ---------------------------------------------------------------- RatioDiagnostic

double RatioDiagnostic::band() const { return relative ? tol * std::abs(target) : tol; }

void RatioDiagnostic::evaluate() {
    const std::size_t n = xs.size();
    probe_pass.assign(n, false);
    pass = false;
    if (n == 0 || ratios.size() != n) return;
    const std::size_t k = std::min<std::size_t>(3, n);
    if (mode == Mode::bounded) {
        for (std::size_t i = 0; i < n; ++i) probe_pass[i] = std::isfinite(ratios[i]) && ratios[i] >= 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        bool ok = true;
        for (std::size_t i = n - k; i < n; ++i) {
            ok = ok && probe_pass[i];
            lo = std::min(lo, ratios[i]);
            hi = std::max(hi, ratios[i]);
        }
        pass = ok && lo > 0.0 && hi <= lo * (1.0 + tol);
        return;
    }
    const double b = band();
    for (std::size_t i = 0; i < n; ++i) {
        probe_pass[i] = std::isfinite(ratios[i]) && std::abs(ratios[i] - target) <= b;
    }
    bool ok = true;
    for (std::size_t i = n - k; i < n; ++i) {
        ok = ok && probe_pass[i];
        if (i > n - k) {
            const double prev = std::abs(ratios[i - 1] - target);
            const double cur = std::abs(ratios[i] - target);
            ok = ok && cur <= prev + slack * b;
        }
    }
    pass = ok;
}

void RatioDiagnostic::write_csv(std::ostream& out) const {
    out << "x,ratio,target,pass\n";
    char buf[128];
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%d\n", xs[i], ratios[i], target,
                      i < probe_pass.size() && probe_pass[i] ? 1 : 0);
        out << buf;
    }
}

nlohmann::json RatioDiagnostic::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["mode"] = mode == Mode::limit ? "limit" : "bounded";
    j["xs"] = xs;
    j["ratios"] = ratios;
    j["target"] = target;
    j["tol"] = tol;
    j["relative"] = relative;
    j["slack"] = slack;
    j["probe_pass"] = probe_pass;
    j["pass"] = pass;
    return j;
}

RatioDiagnostic RatioDiagnostic::from_json(const nlohmann::json& j) {
    RatioDiagnostic d;
    d.name = j.at("name").get<std::string>();
    d.mode = j.at("mode").get<std::string>() == "bounded" ? Mode::bounded : Mode::limit;
    d.xs = j.at("xs").get<std::vector<double>>();
    d.ratios = j.at("ratios").get<std::vector<double>>();
    d.target = j.at("target").get<double>();
    d.tol = j.at("tol").get<double>();
    d.relative = j.at("relative").get<bool>();
    d.slack = j.at("slack").get<double>();
    d.probe_pass = j.at("probe_pass").get<std::vector<bool>>();
    d.pass = j.at("pass").get<bool>();
    return d;
}

RatioDiagnostic make_limit_diagnostic(std::string name, std::vector<double> xs, std::vector<double> ratios,
                                      double target, double tol, bool relative) {
    RatioDiagnostic d;
    d.name = std::move(name);
    d.xs = std::move(xs);
    d.ratios = std::move(ratios);
    d.target = target;
    d.tol = tol;
    d.relative = relative && target != 0.0;
    d.evaluate();
    return d;
}

RatioDiagnostic make_bounded_diagnostic(std::string name, std::vector<double> xs, std::vector<double> ratios,
                                        double tol) {
    RatioDiagnostic d;
    d.name = std::move(name);
    d.xs = std::move(xs);
    d.ratios = std::move(ratios);
    d.mode = RatioDiagnostic::Mode::bounded;
    d.target = 0.0;
    d.tol = tol;
    d.relative = false;
    d.evaluate();
    return d;
}

std::vector<double> default_probes() {
    return {1e2, std::pow(10.0, 2.5), 1e3, std::pow(10.0, 3.5), 1e4};
}

// ---------------------------------------------------------------- probes

double ProbeSchedule::operator()(double x) const { return std::pow(x, beta); }

void ProbeSchedule::validate(const std::vector<double>& xs) const {
    if (!(beta > 0.0 && beta < 1.0)) throw PreconditionError("probe schedule exponent must lie in (0, 1)");
    double prev = -std::numeric_limits<double>::infinity();
    for (double x : xs) {
        const double h = (*this)(x);
        if (!(h < 0.5 * x)) {
            throw PreconditionError("h(x) >= x/2 at probe x = " + std::to_string(x));
        }
        if (h < prev) throw PreconditionError("h is not nondecreasing on the probes");
        prev = h;
    }
}

// ---------------------------------------------------------------- membership

MembershipKind parse_membership_kind(std::string_view name) {
    if (name == "L") return MembershipKind::L;
    if (name == "D") return MembershipKind::D;
    if (name == "S") return MembershipKind::S;
    if (name == "Sstar" || name == "S*") return MembershipKind::Sstar;
    if (name == "SF") return MembershipKind::SF;
    throw PreconditionError("unknown class '" + std::string(name) + "' (expected L, D, S, Sstar, SF)");
}

std::string_view membership_kind_name(MembershipKind kind) {
    switch (kind) {
        case MembershipKind::L: return "L";
        case MembershipKind::D: return "D";
        case MembershipKind::S: return "S";
        case MembershipKind::Sstar: return "Sstar";
        case MembershipKind::SF: return "SF";
    }
    return "?";
}

RatioDiagnostic membership_curve(MembershipKind kind, const IncrementModel& F, const GridDistribution* G,
                                 const std::vector<double>& xs, const MembershipOptions& opt) {
    if ((kind == MembershipKind::SF) != (G != nullptr)) {
        throw PreconditionError("a grid G is required for SF and only for SF");
    }
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (!(xs[i] > xs[i - 1])) throw PreconditionError("probes must increase strictly");
    }
    const std::string name(membership_kind_name(kind));
    std::vector<double> r(xs.size());
    auto fill = [&](auto&& f) {
        for (std::size_t i = 0; i < xs.size(); ++i) r[i] = f(xs[i]) / F.pos_tail(xs[i]);
    };
    switch (kind) {
        case MembershipKind::L:
            fill([&](double x) { return F.pos_tail(x + 1.0); });
            return make_limit_diagnostic(name, xs, r, 1.0, opt.tol_L);
        case MembershipKind::D:
            fill([&](double x) { return F.pos_tail(0.5 * x); });
            return make_bounded_diagnostic(name, xs, r, opt.tol_D);
        case MembershipKind::S: {
            const double q = F.q_plus();
            fill([&](double x) { return q * self_conv_tail_exact(F, x); });
            return make_limit_diagnostic(name, xs, r, 2.0, opt.tol_S);
        }
        case MembershipKind::Sstar: {
            const double mu = mu_plus(F);
            fill([&](double x) { return sstar_integral(F, x); });
            return make_limit_diagnostic(name, xs, r, 2.0 * mu, opt.tol_Sstar);
        }
        case MembershipKind::SF:
            fill([&](double x) { return conv_tail(*G, F, x); });
            return make_limit_diagnostic(name, xs, r, 1.0, opt.tol_SF);
    }
    throw PreconditionError("unknown membership kind");
}

double partial_conv(const GridDistribution& G, const IncrementModel& F, double x, double a, double b) {
    if (!(b > a)) return 0.0;
    const auto& t = G.knots();
    double s = 0.0;
    if (G.atomic()) {
        for (std::size_t i = 1; i < t.size(); ++i) {
            if (t[i] > a && t[i] <= b) s += G.cell_mass(i) * F.pos_tail(x - t[i]);
        }
        if (a < 0.0 && b >= 0.0) s += G.atom_at_zero() * F.pos_tail(x);
        return s;
    }
    if (a < 0.0) {
        s += G.atom_at_zero() * F.pos_tail(x);
        a = 0.0;
    }
    for (std::size_t i = 1; i < t.size() && t[i - 1] < b; ++i) {
        const double lo = std::max(t[i - 1], a);
        const double hi = std::min(t[i], b);
        if (!(hi > lo)) continue;
        const double mass = G.tail(lo) - G.tail(hi);
        if (mass > 0.0) s += mass * F.pos_tail(x - 0.5 * (lo + hi));
    }
    return s;
}

// ---------------------------------------------------------------- Lemma 1

Lemma1Result lemma1_decomposition(const GridDistribution& G, const IncrementModel& F, const ProbeSchedule& h,
                                  const std::vector<double>& xs, double tol) {
    h.validate(xs);
    std::vector<double> r1, r2, r3;
    for (double x : xs) {
        const double hx = h(x);
        const double fx = F.pos_tail(x);
        r1.push_back(F.pos_tail(x - hx) / fx);
        r2.push_back(G.increment(x - hx, x) / fx);
        r3.push_back(partial_conv(G, F, x, hx, x - hx) / fx);
    }
    return {make_limit_diagnostic("lemma1_c1", xs, r1, 1.0, tol),
            make_limit_diagnostic("lemma1_c2", xs, r2, 0.0, tol, false),
            make_limit_diagnostic("lemma1_c3", xs, r3, 0.0, tol, false)};
}

// ---------------------------------------------------------------- Lemma 3

MajorantResult majorant_check(const GridDistribution& G, const IncrementModel& F, double epsilon, int n_max,
                              const std::vector<double>& xs, double grid_slack) {
    if (!(epsilon > 0.0) || n_max < 1 || xs.empty()) {
        throw PreconditionError("majorant check needs eps > 0, n_max >= 1 and probes");
    }
    std::vector<double> r(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) r[i] = conv_tail(G, F, xs[i]) / F.pos_tail(xs[i]);
    std::size_t first = xs.size();
    for (std::size_t i = xs.size(); i-- > 0;) {
        if (r[i] > 1.0 + epsilon) break;
        first = i;
    }
    if (first == xs.size()) throw PreconditionError("no x0 with conv_tail / F <= 1 + eps on the probes");

    MajorantResult out;
    out.epsilon = epsilon;
    out.n_max = n_max;
    out.x0 = xs[first];
    out.A = 1.0 / F.pos_tail(out.x0);

    GridDistribution power = G;
    for (int n = 0; n <= n_max; ++n) {
        if (n >= 2) power = grid_convolve(power, G);
        for (double x : xs) {
            const double lhs = n == 0 ? F.pos_tail(x) : conv_tail(n == 1 ? G : power, F, x);
            const double bound = out.A * std::pow(1.0 + epsilon, n) * F.pos_tail(x);
            if (lhs > bound * (1.0 + grid_slack)) out.violations.push_back({n, x, lhs, bound});
        }
    }
    return out;
}

// ---------------------------------------------------------------- Lemma 4

int StoppedSumModel::truncation() const {
    if (!(p > 0.0 && p <= 1.0)) throw PreconditionError("geometric stopping needs p in (0, 1]");
    if (p == 1.0) return 0;
    // P(nu > n) = (1 - p)^{n + 1}
    int n = 0;
    double rest = 1.0 - p;
    while (rest >= neglected_mass) {
        if (++n > n_cap) throw PreconditionError("stopped-sum truncation exceeds the term cap");
        rest *= 1.0 - p;
    }
    return n;
}

double StoppedSumModel::weight(int n) const { return p * std::pow(1.0 - p, n); }

GridDistribution StoppedSumModel::law() const {
    const int N = truncation();
    if (step.atomic()) {
        std::vector<std::pair<double, double>> atoms{{0.0, weight(0)}};
        GridDistribution power = GridDistribution::point_mass(0.0);
        for (int n = 1; n <= N; ++n) {
            power = grid_convolve(power, step);
            const auto& t = power.knots();
            for (std::size_t i = 0; i < t.size(); ++i) {
                const double m = i == 0 ? power.atom_at_zero() : power.cell_mass(i);
                if (m > 0.0) atoms.emplace_back(t[i], weight(n) * m);
            }
        }
        double total = 0.0;
        for (const auto& a : atoms) total += a.second;
        for (auto& a : atoms) a.second /= total;
        return GridDistribution::from_atoms(std::move(atoms));
    }
    std::vector<std::pair<double, GridDistribution>> parts;
    parts.emplace_back(weight(0), GridDistribution::zero_on(step.knots(), step.interp()));
    GridDistribution power = step;
    for (int n = 1; n <= N; ++n) {
        if (n >= 2) power = grid_convolve(power, step);
        if (power.horizon_mass() > 1e-6) {
            throw HorizonError("stopped-sum term " + std::to_string(n) + " loses mass beyond x_max");
        }
        parts.emplace_back(weight(n), power);
    }
    return grid_mixture(parts);
}

StoppedSumResult stopped_sum_tail(const StoppedSumModel& model, const IncrementModel& F,
                                  const std::vector<double>& xs, double tol) {
    StoppedSumResult out;
    out.terms = model.truncation() + 1;
    const GridDistribution g_nu = model.law();
    std::vector<double> r, t;
    for (double x : xs) {
        r.push_back(conv_tail(g_nu, F, x) / F.pos_tail(x));
        const double gx = model.step.tail(x);
        t.push_back(gx > 0.0 ? g_nu.tail(x) / gx : std::numeric_limits<double>::quiet_NaN());
    }
    out.sf = make_limit_diagnostic("stopped_sum_SF", xs, r, 1.0, tol);
    const double mean_nu = (1.0 - model.p) / model.p;
    out.tail_ratio = make_limit_diagnostic("stopped_sum_tail_ratio", xs, t, mean_nu, tol, mean_nu != 0.0);
    return out;
}

// ---------------------------------------------------------------- Lemma 2

RatioDiagnostic closure_check(const GridDistribution& G1, const GridDistribution& G2, const IncrementModel& F,
                              const std::vector<double>& xs, double tol) {
    const GridDistribution g = grid_convolve(G1, G2);
    std::vector<double> r;
    for (double x : xs) r.push_back(conv_tail(g, F, x) / F.pos_tail(x));
    return make_limit_diagnostic("closure_SF", xs, r, 1.0, tol);
}

// ---------------------------------------------------------------- Lemma 5

SstarCriterionResult sstar_criterion_for_G(const IncrementModel& F, const GridDistribution& G,
                                           const std::vector<double>& xs, double tol) {
    SstarCriterionResult out;
    try {
        out.f_in_sstar = membership_curve(MembershipKind::Sstar, F, nullptr, xs).pass;
    } catch (const DivergenceError&) {
        out.f_in_sstar = false;
    }
    std::vector<double> inc;
    for (double x : xs) inc.push_back(G.increment(x - 1.0, x) / F.pos_tail(x));
    out.small_increments = make_limit_diagnostic("G_unit_increment", xs, inc, 0.0, tol, false);
    MembershipOptions opt;
    opt.tol_SF = tol;
    out.sf = membership_curve(MembershipKind::SF, F, &G, xs, opt);
    out.sf_claimed = out.small_increments.pass;
    return out;
}

// ---------------------------------------------------------------- G_H grids

std::vector<double> probe_knots(double x_max, int points_per_decade) {
    GridOptions opt;
    opt.x_max = x_max;
    opt.points_per_decade = points_per_decade;
    return geometric_knots(opt);
}

GridDistribution gh_grid(const IncrementModel& F, const RenewalMeasure& H, const std::vector<double>& knots) {
    return grid_discretize([&](double x) { return gh_tail(F, H, x); }, knots);
}

GridDistribution g1_grid(const G1Tail& g1, const std::vector<double>& knots) {
    return grid_discretize([&](double x) { return g1(x); }, knots);
}

GhEquivalenceResult gh_equivalence_check(const IncrementModel& F, const RenewalMeasure& H1,
                                         const RenewalMeasure& H2, const std::vector<double>& xs, double tol,
                                         double ratio_tol) {
    GhEquivalenceResult out;
    std::vector<double> ratio;
    for (double x : xs) {
        ratio.push_back(H1(x) / H2(x));
        out.increments1.push_back(H1.increment(x - 1.0, x));
        out.increments2.push_back(H2.increment(x - 1.0, x));
    }
    out.h_ratio = make_bounded_diagnostic("H1_over_H2", xs, ratio, ratio_tol);

    auto vanishing = [](const std::vector<double>& inc) {
        return !inc.empty() && inc.back() <= 0.5 * inc.front();
    };
    std::vector<std::string> notes;
    if (!out.h_ratio.pass) notes.push_back("H1/H2 is not bounded on the probes");
    if (!H1.subadditive || !H2.subadditive) notes.push_back("H1 or H2 is not subadditive");
    if (!vanishing(out.increments1)) notes.push_back("H1(x-1, x] does not decay on the probes");
    if (!vanishing(out.increments2)) notes.push_back("H2(x-1, x] does not decay on the probes");
    out.precondition_ok = notes.empty();
    for (const auto& n : notes) out.precondition_note += (out.precondition_note.empty() ? "" : "; ") + n;
    if (!out.precondition_ok) return out;

    const auto knots = probe_knots(xs.back());
    const GridDistribution g1 = gh_grid(F, H1, knots);
    const GridDistribution g2 = gh_grid(F, H2, knots);
    MembershipOptions opt;
    opt.tol_SF = tol;
    out.sf1 = membership_curve(MembershipKind::SF, F, &g1, xs, opt);
    out.sf2 = membership_curve(MembershipKind::SF, F, &g2, xs, opt);
    out.sf1.name = "SF_G_H1";
    out.sf2.name = "SF_G_H2";
    std::vector<double> l1, l2;
    for (double x : xs) {
        l1.push_back(g1.increment(x - 1.0, x) / F.pos_tail(x));
        l2.push_back(g2.increment(x - 1.0, x) / F.pos_tail(x));
    }
    out.lemma6_1 = make_limit_diagnostic("G_H1_unit_increment", xs, l1, 0.0, tol, false);
    out.lemma6_2 = make_limit_diagnostic("G_H2_unit_increment", xs, l2, 0.0, tol, false);
    out.verdicts_agree = out.sf1.pass == out.sf2.pass;
    return out;
}

}  // namespace htwk
