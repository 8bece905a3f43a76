#pragma once

#include <string>
#include <vector>

#include "htwk/distspec.hpp"
#include "htwk/rng.hpp"

namespace htwk {

/// A one-parameter-family distribution on [0, inf) (or a point mass).
struct Leaf {
    enum class Kind { pareto, lognormal, weibull, exponential, point };

    Kind kind = Kind::point;
    double a = 0.0;  ///< alpha / mu / shape / rate / c
    double b = 0.0;  ///< kappa / sigma / scale

    double tail(double x) const;     ///< P(L > x)
    double cdf_lt(double x) const;   ///< P(L < x)
    double density(double x) const;  ///< density of the continuous part
    double quantile(double u) const; ///< generalized inverse of the cdf
    bool infinite_mean() const { return kind == Kind::pareto && a <= 1.0; }
    bool is_point() const { return kind == Kind::point; }
};

/// One mixture component: xi = sign * L + shift with probability `weight`.
struct Component {
    double weight = 1.0;
    int sign = 1;
    double shift = 0.0;
    Leaf leaf;
};

struct Atom {
    double location;
    double mass;
};

/// Signed increment law split into its positive tail F(x) = P(xi > x) and
/// negative tail N(y) = P(xi^- > y) = P(xi < -y), with a sampler.
class IncrementModel {
public:
    IncrementModel() = default;
    explicit IncrementModel(std::vector<Component> components, std::string spec = {});

    const std::vector<Component>& components() const noexcept { return components_; }
    const std::string& spec() const noexcept { return spec_; }

    /// F(x) = P(xi > x) for x >= 0.
    double pos_tail(double x) const;
    /// Density of the continuous part of xi at x > 0.
    double pos_density(double x) const;
    /// Point masses of xi on (0, inf).
    std::vector<Atom> pos_atoms() const;
    /// N(y) = P(xi < -y) for y >= 0.
    double neg_tail(double y) const;
    /// Point masses of xi^- on (0, inf), i.e. atoms of xi at -location.
    std::vector<Atom> neg_atoms() const;

    double q_plus() const { return pos_tail(0.0); }
    double q_minus() const { return neg_tail(0.0); }
    bool has_negative_part() const { return q_minus() > 0.0; }
    bool infinite_negative_mean() const noexcept { return infinite_negative_mean_; }
    bool infinite_positive_mean() const noexcept { return infinite_positive_mean_; }
    bool continuous() const noexcept { return continuous_; }

    double sample(RngStream& rng) const;
    /// Deterministic draw from explicit uniforms (component, value).
    double sample_from(double u_component, double u_value) const;

private:
    std::vector<Component> components_;
    std::vector<double> cumulative_;
    std::string spec_;
    bool infinite_negative_mean_ = false;
    bool infinite_positive_mean_ = false;
    bool continuous_ = true;
};

/// Binds a parsed expression to an IncrementModel.
IncrementModel spec_to_model(const distspec::DistExpr& expr);

/// Parses and binds in one step.
IncrementModel model_from_spec(std::string_view text);

}  // namespace htwk
