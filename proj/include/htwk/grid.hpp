#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "htwk/error.hpp"

namespace htwk {

/// Distribution on [0, inf) stored by its tail P(X > t_i) at knots
/// 0 = t_0 < t_1 < ... < t_n = x_max. The mass 1 - tail(0) sits at 0 and
/// tail(x_max) is mass beyond the horizon.
class GridDistribution {
public:
    enum class Interp {
        log_linear,  ///< log tail linear in log t between knots; linear on [0, t_1]
        atomic,      ///< mass of (t_{i-1}, t_i] sits at t_i
    };

    GridDistribution() = default;
    GridDistribution(std::vector<double> knots, std::vector<double> tails, Interp interp);

    /// Unit mass at c >= 0, stored atomically on knots {0, c}.
    static GridDistribution point_mass(double c);
    /// Unit mass at 0 on the given knots.
    static GridDistribution zero_on(const std::vector<double>& knots, Interp interp);
    /// Atomic distribution from weighted points (weights must sum to <= 1).
    static GridDistribution from_atoms(std::vector<std::pair<double, double>> atoms);
    /// Empirical law of a sample.
    static GridDistribution empirical(std::vector<double> sample);

    const std::vector<double>& knots() const noexcept { return knots_; }
    const std::vector<double>& tails() const noexcept { return tails_; }
    Interp interp() const noexcept { return interp_; }
    bool atomic() const noexcept { return interp_ == Interp::atomic; }
    std::size_t size() const noexcept { return knots_.size(); }
    double x_max() const { return knots_.back(); }

    /// Horizon beyond which the tail is unknown; infinite when no mass is lost.
    double effective_horizon() const;

    /// P(X > x); throws HorizonError past the horizon.
    double tail(double x) const;
    double cdf(double x) const { return 1.0 - tail(x); }
    /// G(a, b] = tail(a) - tail(b).
    double increment(double a, double b) const { return tail(a) - tail(b); }
    double atom_at_zero() const { return 1.0 - tails_.front(); }
    double horizon_mass() const { return tails_.back(); }
    /// Mass of the cell (t_{i-1}, t_i], i >= 1.
    double cell_mass(std::size_t i) const { return tails_[i - 1] - tails_[i]; }

    friend bool operator==(const GridDistribution&, const GridDistribution&) = default;

private:
    std::vector<double> knots_;
    std::vector<double> tails_;
    Interp interp_ = Interp::log_linear;
};

struct GridOptions {
    double x_max = 1e6;
    int points_per_decade = 64;
    double t_min = 1e-6;
    double defect_bound = 1e-6;
};

/// 0 followed by 10^(k / ppd) for t_min <= . < x_max, then x_max.
std::vector<double> geometric_knots(const GridOptions& opt = {});

/// Tail sampled exactly at the knots. Throws PreconditionError when the
/// input is not nonincreasing.
GridDistribution grid_discretize(const std::function<double(double)>& tail,
                                 const GridOptions& opt = {},
                                 GridDistribution::Interp interp = GridDistribution::Interp::log_linear);
GridDistribution grid_discretize(const std::function<double(double)>& tail,
                                 const std::vector<double>& knots,
                                 GridDistribution::Interp interp = GridDistribution::Interp::log_linear);

/// P(X + Y > x) for independent X ~ a, Y ~ b.
double sum_tail(const GridDistribution& a, const GridDistribution& b, double x);

/// Law of X + Y on the knots of the continuous operand (or all atom sums).
GridDistribution grid_convolve(const GridDistribution& a, const GridDistribution& b);

/// n-fold convolution power; n = 0 gives the unit mass at 0. Throws
/// HorizonError when the mass beyond x_max exceeds defect_bound.
GridDistribution grid_conv_power(const GridDistribution& g, int n, double defect_bound = 1e-6);

/// Finite mixture of grids sharing the same knots.
GridDistribution grid_mixture(const std::vector<std::pair<double, GridDistribution>>& parts);

}  // namespace htwk
