#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "htwk/grid.hpp"
#include "htwk/model.hpp"
#include "htwk/quadrature.hpp"

namespace htwk {

/// m(x) = E min(xi^-, x) = integral of P(xi^- > y) over [0, x].
/// Panel integrals over dyadic knots are computed once at construction.
class TruncatedMean {
public:
    explicit TruncatedMean(const IncrementModel& model, double rel_tol = 1e-13);

    double operator()(double x) const;
    /// x / m(x); at x = 0 the limit 1 / P(xi < 0).
    double ratio(double x) const;
    /// d/dx of x / m(x) = (m(x) - x P(xi^- > x)) / m(x)^2.
    double ratio_derivative(double x) const;
    bool identically_zero() const noexcept { return zero_; }

private:
    IncrementModel model_;
    std::vector<double> knots_;
    std::vector<double> cumulative_;
    double rel_tol_;
    bool zero_ = false;
};

TruncatedMean truncated_neg_mean(const IncrementModel& model);

/// Nondecreasing H on [0, inf) with H(0-) = 0, described by its right-
/// continuous cumulative function, an optional density and point masses.
struct RenewalMeasure {
    std::function<double(double)> cumulative;
    std::function<double(double)> density;
    std::vector<Atom> atoms;
    bool subadditive = false;

    double operator()(double x) const { return x < 0 ? 0.0 : cumulative(x); }
    /// H(a, b] = H(b) - H(a).
    double increment(double a, double b) const { return (*this)(b) - (*this)(a); }

    static RenewalMeasure zero();
    /// H(t) = scale * t.
    static RenewalMeasure lebesgue(double scale = 1.0);
    /// H(t) = scale * t / m(t), with H(0) = scale / P(xi < 0).
    static RenewalMeasure x_over_m(const TruncatedMean& m, double scale = 1.0);
    /// Empirical renewal function 1 + (1 / reps) #{renewal epochs <= t},
    /// points binned geometrically (bins_per_decade) at their in-bin mean.
    static RenewalMeasure empirical(const std::vector<double>& epochs, std::size_t reps,
                                    int bins_per_decade = 256);
};

struct KResult {
    double value = 0.0;  ///< K, or the partial sum when divergent
    bool finite = false;
    int panels = 0;
};

/// K = integral of x / m(x) against F(dx) over (0, inf).
KResult criterion_K(const IncrementModel& model, double rel_tol = 1e-12);

/// mu_+ = integral of F(y) over [0, inf); throws DivergenceError.
double mu_plus(const IncrementModel& model, double rel_tol = 1e-12);

/// Tail of G_1: (1/K) integral over t > x of (t - x) / m(t - x) F(dt).
class G1Tail {
public:
    explicit G1Tail(const IncrementModel& model);
    G1Tail(const IncrementModel& model, double K);

    double operator()(double x) const;
    double K() const noexcept { return K_; }
    const TruncatedMean& m() const noexcept { return m_; }

private:
    IncrementModel model_;
    TruncatedMean m_;
    double K_;
};

double g1_tail(const IncrementModel& model, double K, double x);

struct GhForms {
    double stieltjes = 0.0;  ///< integral of F(t + x) H(dt)
    double by_parts = 0.0;   ///< integral over t > x of H[0, t - x] F(dt)
};

/// Both unclipped representations of the G_H tail.
GhForms gh_tail_forms(const IncrementModel& model, const RenewalMeasure& H, double x,
                      double rel_tol = 1e-13);

/// min(1, integral of F(t + x) H(dt)). Throws PreconditionError when the
/// integral diverges.
double gh_tail(const IncrementModel& model, const RenewalMeasure& H, double x);

/// Integral of F(x - u) G(du) over [0, x].
double conv_tail(const GridDistribution& G, const IncrementModel& F, double x);

/// P(X1 + X2 > x) for X1, X2 i.i.d. with the gridded law.
double self_conv_tail(const GridDistribution& F_grid, double x);

/// P(X1 + X2 > x) for the law of xi given xi > 0, by quadrature.
double self_conv_tail_exact(const IncrementModel& model, double x);

/// Integral of F(x - y) F(y) dy over [0, x], folded about x / 2.
double sstar_integral(const IncrementModel& model, double x);

/// Writes "x,value" rows with a header and 12 significant digits.
void write_tail_csv(std::ostream& out, const std::vector<double>& xs,
                    const std::vector<double>& values, const char* value_name = "value");

}  // namespace htwk
