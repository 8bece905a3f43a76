#include "htwk/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

namespace htwk {

double Leaf::tail(double x) const {
    switch (kind) {
        case Kind::point:
            return x < a ? 1.0 : 0.0;
        case Kind::pareto:
            return x <= 0 ? 1.0 : std::exp(-a * std::log1p(x / b));
        case Kind::exponential:
            return x <= 0 ? 1.0 : std::exp(-a * x);
        case Kind::weibull:
            return x <= 0 ? 1.0 : std::exp(-std::pow(x / b, a));
        case Kind::lognormal:
            return x <= 0 ? 1.0
                          : 0.5 * std::erfc((std::log(x) - a) / (b * std::numbers::sqrt2));
    }
    return 0.0;
}

double Leaf::cdf_lt(double x) const {
    if (kind == Kind::point) return a < x ? 1.0 : 0.0;
    return 1.0 - tail(x);
}

double Leaf::density(double x) const {
    if (x <= 0) return 0.0;
    switch (kind) {
        case Kind::point:
            return 0.0;
        case Kind::pareto:
            return a / b * std::exp(-(a + 1) * std::log1p(x / b));
        case Kind::exponential:
            return a * std::exp(-a * x);
        case Kind::weibull: {
            double z = std::pow(x / b, a);
            return a / x * z * std::exp(-z);
        }
        case Kind::lognormal: {
            double z = (std::log(x) - a) / b;
            return std::exp(-0.5 * z * z) / (x * b * std::sqrt(2 * std::numbers::pi));
        }
    }
    return 0.0;
}

double Leaf::quantile(double u) const {
    switch (kind) {
        case Kind::point:
            return a;
        case Kind::pareto:
            return b * (std::pow(1.0 - u, -1.0 / a) - 1.0);
        case Kind::exponential:
            return -std::log1p(-u) / a;
        case Kind::weibull:
            return b * std::pow(-std::log1p(-u), 1.0 / a);
        case Kind::lognormal:
            return std::exp(a - b * std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u));
    }
    return 0.0;
}

IncrementModel::IncrementModel(std::vector<Component> components, std::string spec)
    : components_(std::move(components)), spec_(std::move(spec)) {
    if (components_.empty()) throw PreconditionError("model needs at least one component");
    double total = 0.0;
    for (const auto& c : components_) {
        if (!(c.weight > 0)) throw PreconditionError("component weights must be positive");
        total += c.weight;
        cumulative_.push_back(total);
        if (c.sign < 0 && c.leaf.infinite_mean()) infinite_negative_mean_ = true;
        if (c.sign > 0 && c.leaf.infinite_mean()) infinite_positive_mean_ = true;
        if (c.leaf.is_point()) continuous_ = false;
    }
    if (std::abs(total - 1.0) > 1e-12) throw PreconditionError("component weights must sum to 1");
}

double IncrementModel::pos_tail(double x) const {
    double s = 0.0;
    for (const auto& c : components_) {
        s += c.weight * (c.sign > 0 ? c.leaf.tail(x - c.shift) : c.leaf.cdf_lt(c.shift - x));
    }
    return std::clamp(s, 0.0, 1.0);
}

double IncrementModel::pos_density(double x) const {
    double s = 0.0;
    for (const auto& c : components_) {
        s += c.weight * c.leaf.density(c.sign > 0 ? x - c.shift : c.shift - x);
    }
    return s;
}

double IncrementModel::neg_tail(double y) const {
    double s = 0.0;
    for (const auto& c : components_) {
        s += c.weight * (c.sign > 0 ? c.leaf.cdf_lt(-y - c.shift) : c.leaf.tail(y + c.shift));
    }
    return std::clamp(s, 0.0, 1.0);
}

std::vector<Atom> IncrementModel::pos_atoms() const {
    std::vector<Atom> out;
    for (const auto& c : components_) {
        if (!c.leaf.is_point()) continue;
        double loc = c.sign * c.leaf.a + c.shift;
        if (loc > 0) out.push_back({loc, c.weight});
    }
    return out;
}

std::vector<Atom> IncrementModel::neg_atoms() const {
    std::vector<Atom> out;
    for (const auto& c : components_) {
        if (!c.leaf.is_point()) continue;
        double loc = c.sign * c.leaf.a + c.shift;
        if (loc < 0) out.push_back({-loc, c.weight});
    }
    return out;
}

double IncrementModel::sample_from(double u_component, double u_value) const {
    std::size_t i = 0;
    if (components_.size() > 1) {
        double target = u_component * cumulative_.back();
        i = static_cast<std::size_t>(
            std::upper_bound(cumulative_.begin(), cumulative_.end(), target) - cumulative_.begin());
        i = std::min(i, components_.size() - 1);
    }
    const Component& c = components_[i];
    return c.sign * c.leaf.quantile(u_value) + c.shift;
}

double IncrementModel::sample(RngStream& rng) const {
    double uc = components_.size() > 1 ? rng.uniform() : 0.0;
    return sample_from(uc, rng.uniform());
}

namespace {

using distspec::DistExpr;
using distspec::NodeKind;

void flatten(const DistExpr& e, int sign, double shift, double weight,
             std::vector<Component>& out) {
    switch (e.kind) {
        case NodeKind::pareto:
            out.push_back({weight, sign, shift, {Leaf::Kind::pareto, e.param("alpha"), e.param("kappa")}});
            return;
        case NodeKind::lognormal:
            out.push_back({weight, sign, shift, {Leaf::Kind::lognormal, e.param("mu"), e.param("sigma")}});
            return;
        case NodeKind::weibull:
            out.push_back({weight, sign, shift, {Leaf::Kind::weibull, e.param("shape"), e.param("scale")}});
            return;
        case NodeKind::exponential:
            out.push_back({weight, sign, shift, {Leaf::Kind::exponential, e.param("rate"), 0.0}});
            return;
        case NodeKind::point:
            // Canonical form: sign +1, location folded into the leaf.
            out.push_back({weight, 1, 0.0, {Leaf::Kind::point, sign * e.param("c") + shift, 0.0}});
            return;
        case NodeKind::neg:
            flatten(e.children.at(0), -sign, shift, weight, out);
            return;
        case NodeKind::shift:
            flatten(e.children.at(0), sign, shift + sign * e.param("c"), weight, out);
            return;
        case NodeKind::mix:
            for (std::size_t i = 0; i < e.children.size(); ++i) {
                flatten(e.children[i], sign, shift, weight * e.weights[i], out);
            }
            return;
    }
}

}  // namespace

IncrementModel spec_to_model(const DistExpr& expr) {
    // Rejects unsupported compositions such as a negated mixture that itself
    // contains a neg (the child of neg must live on [0, inf)).
    distspec::validate(expr);
    std::vector<Component> comps;
    flatten(expr, 1, 0.0, 1.0, comps);
    // Renormalise rounding in nested weight products.
    double total = 0.0;
    for (const auto& c : comps) total += c.weight;
    for (auto& c : comps) c.weight /= total;
    return IncrementModel(std::move(comps), distspec::format_spec(expr));
}

IncrementModel model_from_spec(std::string_view text) {
    return spec_to_model(distspec::parse_spec(text));
}

}  // namespace htwk
