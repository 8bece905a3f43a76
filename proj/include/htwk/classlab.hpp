#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "htwk/grid.hpp"
#include "htwk/model.hpp"
#include "htwk/tailmath.hpp"

namespace htwk {

/// A curve x -> r(x) with a finite-probe verdict for a limit statement.
///
/// Limit mode: a probe passes when |r - target| <= band, where band is tol
/// (absolute) or tol * |target| (relative). The curve passes when the last
/// three probes pass and |r - target| does not grow over them by more than
/// slack * band.
///
/// Bounded mode: a probe passes when r is finite; the curve passes when the
/// last three values satisfy max / min <= 1 + tol.
struct RatioDiagnostic {
    enum class Mode { limit, bounded };

    std::string name;
    std::vector<double> xs;
    std::vector<double> ratios;
    Mode mode = Mode::limit;
    double target = 1.0;
    double tol = 0.05;
    bool relative = true;
    double slack = 0.1;

    std::vector<bool> probe_pass;
    bool pass = false;

    double band() const;
    /// Recomputes probe_pass and pass from the stored numbers.
    void evaluate();

    void write_csv(std::ostream& out) const;
    nlohmann::json to_json() const;
    static RatioDiagnostic from_json(const nlohmann::json& j);
};

RatioDiagnostic make_limit_diagnostic(std::string name, std::vector<double> xs, std::vector<double> ratios,
                                      double target, double tol, bool relative = true);
RatioDiagnostic make_bounded_diagnostic(std::string name, std::vector<double> xs, std::vector<double> ratios,
                                        double tol);

/// Probes {1e2, 10^2.5, 1e3, 10^3.5, 1e4}.
std::vector<double> default_probes();

/// h(x) = x^beta, used to split [0, x] into [0, h], (h, x - h], (x - h, x].
struct ProbeSchedule {
    double beta = 0.5;

    double operator()(double x) const;
    /// Throws PreconditionError unless h is nondecreasing and h(x) < x / 2 on xs.
    void validate(const std::vector<double>& xs) const;
};

enum class MembershipKind { L, D, S, Sstar, SF };

MembershipKind parse_membership_kind(std::string_view name);
std::string_view membership_kind_name(MembershipKind kind);

struct MembershipOptions {
    double tol_L = 0.05;
    double tol_D = 0.1;
    double tol_S = 0.05;
    double tol_Sstar = 0.05;
    double tol_SF = 0.05;
};

/// L: F(x+1)/F(x) -> 1; D: F(x/2)/F(x) bounded; S: P(X1+X2 > x)/P(X > x) -> 2
/// for the law of xi given xi > 0; Sstar: integral of F(x-y)F(y) over [0,x]
/// divided by F(x) -> 2 mu_+; SF: integral of F(x-u) G(du) over [0,x]
/// divided by F(x) -> 1 (requires G).
RatioDiagnostic membership_curve(MembershipKind kind, const IncrementModel& F, const GridDistribution* G,
                                 const std::vector<double>& xs, const MembershipOptions& opt = {});

/// Integral of F(x - u) G(du) over (a, b].
double partial_conv(const GridDistribution& G, const IncrementModel& F, double x, double a, double b);

struct Lemma1Result {
    RatioDiagnostic c1;  ///< F(x - h) / F(x), target 1
    RatioDiagnostic c2;  ///< G(x - h, x] / F(x), target 0
    RatioDiagnostic c3;  ///< integral over (h, x - h] of F(x - u) G(du) / F(x), target 0
    bool all_pass() const { return c1.pass && c2.pass && c3.pass; }
};

Lemma1Result lemma1_decomposition(const GridDistribution& G, const IncrementModel& F, const ProbeSchedule& h,
                                  const std::vector<double>& xs, double tol = 0.02);

struct MajorantViolation {
    int n;
    double x;
    double lhs;
    double bound;
};

struct MajorantResult {
    double x0 = 0.0;
    double A = 0.0;
    double epsilon = 0.0;
    int n_max = 0;
    std::vector<MajorantViolation> violations;
};

/// Picks x0 as the first probe from which conv_tail(G, F, x) / F(x) <= 1 + eps
/// on all later probes, sets A = 1 / F(x0) and checks
/// integral of F(x - u) G^{*n}(du) <= A (1 + eps)^n F(x) for n <= n_max.
MajorantResult majorant_check(const GridDistribution& G, const IncrementModel& F, double epsilon, int n_max,
                              const std::vector<double>& xs, double grid_slack = 1e-3);

/// Step law G with a geometric number of steps, P(nu = n) = p (1 - p)^n.
struct StoppedSumModel {
    GridDistribution step;
    double p = 0.5;
    int n_cap = 400;
    double neglected_mass = 1e-8;

    /// Largest n kept so that P(nu > n) < neglected_mass.
    int truncation() const;
    double weight(int n) const;
    GridDistribution law() const;
};

struct StoppedSumResult {
    RatioDiagnostic sf;           ///< conv_tail(G_nu, F, x) / F(x), target 1
    RatioDiagnostic tail_ratio;   ///< G_nu(x) / G(x) against E nu, informational
    int terms = 0;
};

StoppedSumResult stopped_sum_tail(const StoppedSumModel& model, const IncrementModel& F,
                                  const std::vector<double>& xs, double tol = 0.05);

/// conv_tail(G1 * G2, F, x) / F(x), target 1.
RatioDiagnostic closure_check(const GridDistribution& G1, const GridDistribution& G2, const IncrementModel& F,
                              const std::vector<double>& xs, double tol = 0.05);

struct SstarCriterionResult {
    bool f_in_sstar = false;       ///< precondition on F, checked numerically
    RatioDiagnostic small_increments;  ///< G(x - 1, x] / F(x), target 0
    RatioDiagnostic sf;                ///< SF curve for G
    bool sf_claimed = false;           ///< the increment curve passed
};

SstarCriterionResult sstar_criterion_for_G(const IncrementModel& F, const GridDistribution& G,
                                           const std::vector<double>& xs, double tol = 0.05);

/// Tail of G_H sampled on the given knots.
GridDistribution gh_grid(const IncrementModel& F, const RenewalMeasure& H, const std::vector<double>& knots);

/// Tail of G_1 sampled on the given knots.
GridDistribution g1_grid(const G1Tail& g1, const std::vector<double>& knots);

/// Knots of the default grid restricted to [0, x_max].
std::vector<double> probe_knots(double x_max, int points_per_decade = 64);

struct GhEquivalenceResult {
    RatioDiagnostic h_ratio;      ///< H1 / H2, bounded mode
    std::vector<double> increments1;  ///< H1(x) - H1(x - 1)
    std::vector<double> increments2;
    bool precondition_ok = false;
    std::string precondition_note;
    RatioDiagnostic sf1, sf2;
    RatioDiagnostic lemma6_1, lemma6_2;  ///< G_Hi(x - 1, x] / F(x), target 0
    bool verdicts_agree = false;
};

GhEquivalenceResult gh_equivalence_check(const IncrementModel& F, const RenewalMeasure& H1,
                                         const RenewalMeasure& H2, const std::vector<double>& xs,
                                         double tol = 0.05, double ratio_tol = 0.25);

}  // namespace htwk
