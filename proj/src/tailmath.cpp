#include "htwk/tailmath.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>

#include <boost/math/quadrature/gauss.hpp>

namespace htwk {

namespace {

// Integrates f over [a, b] on geometric sub-panels anchored at x0 and split
// at the given breakpoints.
double integrate_geometric(const quad::Integrand& f, double a, double b, std::vector<double> breaks,
                           double rel_tol, double x0 = 1.0) {
    if (!(b > a)) return 0.0;
    std::vector<double> cuts{a, b};
    for (double t = x0; t < b; t *= 2.0) {
        if (t > a) cuts.push_back(t);
    }
    for (double t : breaks) {
        if (t > a && t < b) cuts.push_back(t);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double s = 0.0;
    for (std::size_t i = 1; i < cuts.size(); ++i) s += quad::integrate(f, cuts[i - 1], cuts[i], rel_tol);
    return s;
}

quad::PanelOptions panels(double scale, double rel_tol) {
    quad::PanelOptions opt;
    opt.x0 = std::max(1.0, scale);
    opt.rel_tol = rel_tol;
    return opt;
}

// Integral of f over [0, inf) with f allowed to jump or kink at `breaks`.
quad::ImproperResult integrate_with_breaks(const quad::Integrand& f, std::vector<double> breaks, double scale,
                                           double rel_tol) {
    double last = 0.0;
    for (double b : breaks) last = std::max(last, b);
    if (!(last > 0.0)) return quad::integrate_to_infinity(f, panels(scale, rel_tol));
    const double head = integrate_geometric(f, 0.0, last, std::move(breaks), rel_tol, std::max(1.0, scale));
    auto tail = quad::integrate_to_infinity([&](double s) { return f(last + s); }, panels(scale, rel_tol));
    tail.value += head;
    return tail;
}

// Points where F(t + x) jumps or where an x/m density kinks.
std::vector<double> gh_breaks(const IncrementModel& model, double x) {
    std::vector<double> out;
    for (const auto& a : model.pos_atoms()) {
        if (a.location > x) out.push_back(a.location - x);
    }
    for (const auto& a : model.neg_atoms()) out.push_back(a.location);
    return out;
}

}  // namespace

// ---------------------------------------------------------------- m(x)

TruncatedMean::TruncatedMean(const IncrementModel& model, double rel_tol)
    : model_(model), rel_tol_(rel_tol) {
    zero_ = !model_.has_negative_part();
    if (zero_) return;
    knots_.push_back(0.0);
    for (int k = -30; k <= 1000; ++k) knots_.push_back(std::ldexp(1.0, k));
    for (const auto& a : model_.neg_atoms()) knots_.push_back(a.location);
    std::sort(knots_.begin(), knots_.end());
    knots_.erase(std::unique(knots_.begin(), knots_.end()), knots_.end());
    cumulative_.resize(knots_.size());
    cumulative_[0] = 0.0;
    auto nbar = [this](double y) { return model_.neg_tail(y); };
    for (std::size_t i = 1; i < knots_.size(); ++i) {
        cumulative_[i] = cumulative_[i - 1] + quad::integrate(nbar, knots_[i - 1], knots_[i], rel_tol_);
    }
}

double TruncatedMean::operator()(double x) const {
    if (zero_ || x <= 0.0) return 0.0;
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
    if (knots_[i] == x) return cumulative_[i];
    auto nbar = [this](double y) { return model_.neg_tail(y); };
    if (i + 1 == knots_.size()) return cumulative_[i] + quad::integrate(nbar, knots_[i], x, rel_tol_);
    // Inside a dyadic panel the integrand is smooth: fixed Gauss rule.
    return cumulative_[i] + boost::math::quadrature::gauss<double, 20>::integrate(nbar, knots_[i], x);
}

double TruncatedMean::ratio(double x) const {
    if (zero_) return std::numeric_limits<double>::infinity();
    if (x <= 0.0) return 1.0 / model_.q_minus();
    return x / (*this)(x);
}

double TruncatedMean::ratio_derivative(double x) const {
    if (zero_) return std::numeric_limits<double>::infinity();
    const double xe = std::max(x, 1e-8);
    const double mx = (*this)(xe);
    return (mx - xe * model_.neg_tail(xe)) / (mx * mx);
}

TruncatedMean truncated_neg_mean(const IncrementModel& model) { return TruncatedMean(model); }

// ---------------------------------------------------------------- H

RenewalMeasure RenewalMeasure::zero() {
    RenewalMeasure h;
    h.cumulative = [](double) { return 0.0; };
    h.subadditive = true;
    return h;
}

RenewalMeasure RenewalMeasure::lebesgue(double scale) {
    RenewalMeasure h;
    h.cumulative = [scale](double t) { return scale * t; };
    h.density = [scale](double) { return scale; };
    h.subadditive = true;
    return h;
}

RenewalMeasure RenewalMeasure::x_over_m(const TruncatedMean& m, double scale) {
    if (m.identically_zero()) throw PreconditionError("x/m(x) needs a nonzero negative part");
    auto mp = std::make_shared<const TruncatedMean>(m);
    RenewalMeasure h;
    h.cumulative = [mp, scale](double t) { return scale * mp->ratio(t); };
    h.density = [mp, scale](double t) { return scale * mp->ratio_derivative(t); };
    h.atoms.push_back({0.0, scale * mp->ratio(0.0)});
    h.subadditive = true;
    return h;
}

RenewalMeasure RenewalMeasure::empirical(const std::vector<double>& epochs, std::size_t reps,
                                         int bins_per_decade) {
    if (reps == 0) throw PreconditionError("empirical renewal measure needs reps >= 1");
    auto sorted = std::make_shared<std::vector<double>>(epochs);
    std::sort(sorted->begin(), sorted->end());
    const double w = 1.0 / static_cast<double>(reps);

    RenewalMeasure h;
    h.atoms.push_back({0.0, 1.0});
    // Geometric bins, each represented by the mean of its points.
    std::size_t i = 0;
    while (i < sorted->size()) {
        const double v = (*sorted)[i];
        if (v <= 0.0) {
            h.atoms.front().mass += w;
            ++i;
            continue;
        }
        const double bin = std::floor(bins_per_decade * std::log10(v));
        const double upper = std::pow(10.0, (bin + 1) / bins_per_decade);
        double sum = 0.0;
        std::size_t count = 0;
        while (i < sorted->size() && (*sorted)[i] < upper) {
            sum += (*sorted)[i];
            ++count;
            ++i;
        }
        h.atoms.push_back({sum / static_cast<double>(count), w * static_cast<double>(count)});
    }
    h.cumulative = [sorted, w](double t) {
        auto n = std::upper_bound(sorted->begin(), sorted->end(), t) - sorted->begin();
        return 1.0 + w * static_cast<double>(n);
    };
    h.subadditive = true;
    return h;
}

// ---------------------------------------------------------------- K, mu_+

KResult criterion_K(const IncrementModel& model, double rel_tol) {
    if (!model.infinite_negative_mean()) {
        throw PreconditionError("criterion K applies only when E xi^- is infinite");
    }
    TruncatedMean m(model);
    double atoms = 0.0;
    for (const auto& a : model.pos_atoms()) atoms += m.ratio(a.location) * a.mass;
    auto res = quad::integrate_to_infinity(
        [&](double x) { return m.ratio(x) * model.pos_density(x); }, panels(1.0, rel_tol));
    return {atoms + res.value, res.finite, res.panels};
}

double mu_plus(const IncrementModel& model, double rel_tol) {
    auto res = quad::integrate_to_infinity([&](double y) { return model.pos_tail(y); },
                                           panels(1.0, rel_tol));
    if (!res.finite) throw DivergenceError("mu_+ diverges (positive tail not integrable)", res.value);
    return res.value;
}

// ---------------------------------------------------------------- G_1

namespace {

double finite_K(const IncrementModel& model) {
    const KResult k = criterion_K(model);
    if (!k.finite) throw PreconditionError("K is infinite; G_1 undefined");
    return k.value;
}

}  // namespace

G1Tail::G1Tail(const IncrementModel& model) : G1Tail(model, finite_K(model)) {}

G1Tail::G1Tail(const IncrementModel& model, double K) : model_(model), m_(model), K_(K) {
    if (!(K > 0) || !std::isfinite(K)) throw PreconditionError("G_1 needs 0 < K < inf");
}

double G1Tail::operator()(double x) const {
    if (x < 0.0) return 1.0;
    double s = 0.0;
    for (const auto& a : model_.pos_atoms()) {
        if (a.location > x) s += m_.ratio(a.location - x) * a.mass;
    }
    auto res = quad::integrate_to_infinity(
        [&](double t) { return m_.ratio(t) * model_.pos_density(x + t); }, panels(1.0 + x, 1e-13));
    s += res.value;
    return std::clamp(s / K_, 0.0, 1.0);
}

double g1_tail(const IncrementModel& model, double K, double x) { return G1Tail(model, K)(x); }

// ---------------------------------------------------------------- G_H

GhForms gh_tail_forms(const IncrementModel& model, const RenewalMeasure& H, double x, double rel_tol) {
    GhForms out;
    for (const auto& a : H.atoms) out.stieltjes += a.mass * model.pos_tail(a.location + x);
    const std::vector<double> breaks = gh_breaks(model, x);
    if (H.density) {
        auto res = integrate_with_breaks([&](double t) { return model.pos_tail(t + x) * H.density(t); }, breaks,
                                         1.0 + x, rel_tol);
        if (!res.finite) throw PreconditionError("integral of F(t + x) H(dt) diverges");
        out.stieltjes += res.value;
    }
    for (const auto& a : model.pos_atoms()) {
        if (a.location > x) out.by_parts += H(a.location - x) * a.mass;
    }
    auto res = integrate_with_breaks([&](double s) { return H(s) * model.pos_density(x + s); }, breaks, 1.0 + x,
                                     rel_tol);
    if (!res.finite) throw PreconditionError("integral of H[0, t - x] F(dt) diverges");
    out.by_parts += res.value;
    return out;
}

double gh_tail(const IncrementModel& model, const RenewalMeasure& H, double x) {
    double s = 0.0;
    for (const auto& a : H.atoms) s += a.mass * model.pos_tail(a.location + x);
    if (H.density) {
        auto res = integrate_with_breaks([&](double t) { return model.pos_tail(t + x) * H.density(t); },
                                         gh_breaks(model, x), 1.0 + x, 1e-12);
        if (!res.finite) throw PreconditionError("integral of F(t + x) H(dt) diverges");
        s += res.value;
    }
    return std::min(1.0, s);
}

// ---------------------------------------------------------------- convolutions

double conv_tail(const GridDistribution& G, const IncrementModel& F, double x) {
    if (x < 0.0) return 0.0;
    if (x > G.effective_horizon() * (1 + 1e-12)) throw HorizonError("conv_tail beyond grid horizon");
    const auto& t = G.knots();
    if (G.atomic()) {
        double s = 0.0;
        for (std::size_t i = 0; i < t.size() && t[i] <= x; ++i) {
            const double mass = i == 0 ? G.atom_at_zero() : G.cell_mass(i);
            if (mass > 0.0) s += mass * F.pos_tail(x - t[i]);
        }
        return s;
    }
    const double half = 0.5 * x;
    // u in [0, x/2]: F(x - u) is smooth in u.
    double s = G.atom_at_zero() * F.pos_tail(x);
    for (std::size_t i = 1; i < t.size() && t[i - 1] < half; ++i) {
        const double lo = t[i - 1];
        const double hi = std::min(t[i], half);
        const double mass = (hi == t[i]) ? G.cell_mass(i) : G.tail(lo) - G.tail(hi);
        if (mass > 0.0) s += mass * F.pos_tail(x - 0.5 * (lo + hi));
    }
    // u in (x/2, x], integrated by parts against F(dv), v = x - u.
    const double gx = G.tail(x);
    s += F.pos_tail(half) * (G.tail(half) - gx);
    double prev_v = 0.0;
    double prev_f = F.pos_tail(0.0);
    for (std::size_t j = 1; j < t.size() && prev_v < half; ++j) {
        const double v = std::min(t[j], half);
        const double fv = F.pos_tail(v);
        const double dF = prev_f - fv;
        if (dF > 0.0) s += dF * (G.tail(x - 0.5 * (prev_v + v)) - gx);
        prev_v = v;
        prev_f = fv;
    }
    return s;
}

double self_conv_tail(const GridDistribution& F_grid, double x) { return sum_tail(F_grid, F_grid, x); }

double self_conv_tail_exact(const IncrementModel& model, double x) {
    const double q = model.q_plus();
    if (!(q > 0)) throw PreconditionError("positive part is empty");
    if (x <= 0.0) return 1.0;
    const double half = 0.5 * x;
    auto cond_tail = [&](double y) { return model.pos_tail(y) / q; };
    std::vector<double> breaks;
    double atoms = 0.0;
    for (const auto& a : model.pos_atoms()) {
        breaks.push_back(a.location);
        breaks.push_back(x - a.location);
        if (a.location <= half) atoms += a.mass / q * cond_tail(x - a.location);
    }
    const double body = integrate_geometric(
        [&](double u) { return model.pos_density(u) / q * cond_tail(x - u); }, 0.0, half, breaks, 1e-13);
    const double h = cond_tail(half);
    return 2.0 * (body + atoms) + h * h;
}

double sstar_integral(const IncrementModel& model, double x) {
    if (x <= 0.0) return 0.0;
    std::vector<double> breaks;
    for (const auto& a : model.pos_atoms()) {
        breaks.push_back(a.location);
        breaks.push_back(x - a.location);
    }
    return 2.0 * integrate_geometric([&](double y) { return model.pos_tail(x - y) * model.pos_tail(y); },
                                     0.0, 0.5 * x, breaks, 1e-13);
}

void write_tail_csv(std::ostream& out, const std::vector<double>& xs, const std::vector<double>& values,
                    const char* value_name) {
    out << "x," << value_name << '\n';
    char buf[96];
    for (std::size_t i = 0; i < xs.size() && i < values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", xs[i], values[i]);
        out << buf;
    }
}

}  // namespace htwk
