#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "htwk/classlab.hpp"
#include "htwk/model.hpp"
#include "htwk/walksim.hpp"

namespace htwk {

enum class Verdict { pass, fail, inconclusive, not_applicable };

std::string_view verdict_name(Verdict v);
Verdict parse_verdict(std::string_view name);

/// One probe of a simulated-vs-analytic comparison.
struct ProbeResult {
    double x = 0.0;
    double simulated = 0.0;
    double sim_lo = 0.0;
    double sim_hi = 0.0;
    double analytic = 0.0;
    double ratio = 0.0;
    double ratio_lo = 0.0;
    double ratio_hi = 0.0;
    std::uint64_t hits = 0;  ///< events behind `simulated`; only checked when min_hits > 0
    Verdict status = Verdict::inconclusive;
};

/// How a block turns its stored numbers into a verdict.
///
///  - band: each considered probe with hits >= min_hits is conclusive; it
///    passes when [ratio_lo, ratio_hi] intersects (or, with `contain`, lies
///    inside) [band_lo, band_hi]. Any failing probe fails the block; fewer
///    than min_conclusive conclusive probes make it inconclusive. Only the
///    last `last_k` probes are considered when last_k > 0.
///  - ks: passes when value "ks" < "threshold" (> with expect_exceed).
///  - curves: passes when every stored RatioDiagnostic passes.
///  - composite: fail if any subcheck fails, inconclusive if any is
///    inconclusive, else pass; not_applicable subchecks are skipped.
///  - alternatives: the first two subchecks are alternative hypotheses (one
///    must pass); every later subcheck must pass.
struct VerdictRule {
    enum class Kind { band, ks, curves, composite, alternatives };
    Kind kind = Kind::band;
    double band_lo = 0.0;
    double band_hi = 0.0;
    bool contain = false;
    std::uint64_t min_hits = 0;
    std::size_t min_conclusive = 1;
    std::size_t last_k = 0;
    bool expect_exceed = false;
};

struct CheckBlock {
    std::string name;
    std::string anchor;
    VerdictRule rule;
    std::vector<ProbeResult> probes;
    std::map<std::string, double> values;
    std::map<std::string, double> tolerances;
    std::vector<RatioDiagnostic> curves;
    std::vector<CheckBlock> subchecks;
    /// When set, overrides the rule (hypothesis not met, degenerate input).
    std::optional<Verdict> precondition;
    std::string note;
    std::uint64_t seed = 0;
    Verdict verdict = Verdict::inconclusive;

    nlohmann::json to_json() const;
    static CheckBlock from_json(const nlohmann::json& j);
};

/// Recomputes probe statuses and the verdict of a block (and its subchecks)
/// from stored numbers only.
Verdict recompute_verdict(CheckBlock& block);

struct VerificationReport {
    std::string experiment_id;
    std::string model_spec;
    std::uint64_t seed = 0;
    std::vector<CheckBlock> blocks;

    nlohmann::json to_json() const;
    static VerificationReport from_json(const nlohmann::json& j);
};

inline constexpr const char* report_schema = "htwk-report/1";

/// 0 when every verdict passes, 3 when any fails, 2 when none fails but some
/// are inconclusive. Subchecks count.
int exit_code_for(const VerificationReport& report);

// ---------------------------------------------------------------- checks

struct MainTheoremOptions {
    double tol = 0.2;
    std::uint64_t min_hits = 50;
    std::size_t min_conclusive = 3;
    bool independent_pools = false;
    std::size_t sup_samples = 100000;  ///< draws of M for the weak-equivalence curve
    double barrier = 1e4;
};

/// P(M_tau > x) against E tau F(x), with the assumption-free lower bound and
/// the weak-equivalence curve for the empirical law of M as subchecks.
CheckBlock main_theorem_report(const IncrementModel& model, const std::vector<double>& xs, std::size_t cycles,
                               const ParallelOptions& par, const MainTheoremOptions& opt = {});

struct RenewalBoundOptions {
    double tol = 0.15;
    std::size_t last_k = 2;
    std::size_t sup_samples = 100000;
    double barrier = 1e4;
};

/// H_(x) m(x) / x against the band [p (1 - tol), p (2 + tol)].
CheckBlock renewal_bound_report(const IncrementModel& model, const std::vector<double>& xs, std::size_t reps,
                                const ParallelOptions& par, const RenewalBoundOptions& opt = {});

/// Direct draws of M against psi_1 + ... + psi_nu, nu geometric(p).
CheckBlock ladder_identity_report(const IncrementModel& model, double barrier, std::size_t n,
                                  const ParallelOptions& par);

struct GplusOptions {
    double tol = 0.2;
    std::uint64_t min_hits = 50;
    std::size_t ladder_samples = 1000000;
    double barrier = 1e4;
    double horizon = 1e6;
};

/// Empirical ladder-height tail against (1 / (1 - p)) sum over renewal epochs
/// of F(T_k + x).
CheckBlock gplus_tail_report(const IncrementModel& model, const std::vector<double>& xs, std::size_t reps,
                             const ParallelOptions& par, const GplusOptions& opt = {});

struct Theorem2Options {
    MembershipOptions membership;
    double tol = 0.05;
};

/// Class hypotheses on F, then SF membership and vanishing unit increments
/// for G_1.
CheckBlock theorem2_report(const IncrementModel& model, const std::vector<double>& xs,
                           const Theorem2Options& opt = {});

}  // namespace htwk
