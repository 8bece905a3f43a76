#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "htwk/model.hpp"
#include "htwk/rng.hpp"

namespace htwk {

inline constexpr std::uint64_t default_step_budget = 1'000'000'000ULL;

/// One cycle of the walk up to tau = min{n >= 1 : S_n < 0}.
struct CycleOutcome {
    std::uint64_t tau = 0;
    double m_tau = 0.0;   ///< max of S_0, ..., S_tau
    double chi = 0.0;     ///< -S_tau
    double s_prev = 0.0;  ///< S_{tau - 1}
};

struct SupEstimate {
    double m_value = 0.0;
    bool hit_zero_set = false;
    double barrier = 0.0;
    bool bias_flag = false;
    std::uint64_t steps = 0;
};

struct LadderSample {
    double psi = 0.0;  ///< S_eta when not censored
    std::uint64_t eta = 0;
    bool censored = false;
};

double sample_increment(const IncrementModel& model, RngStream& rng);

/// Throws BudgetError when more than `budget` steps are needed.
CycleOutcome run_cycle(const IncrementModel& model, RngStream& rng, std::uint64_t budget = default_step_budget);

/// Runs until S_n <= max_{k<=n} S_k - B and returns the running maximum.
SupEstimate estimate_sup(const IncrementModel& model, double barrier, RngStream& rng,
                         std::uint64_t budget = default_step_budget);

/// Runs until S_n > 0 (ladder height) or S_n <= -B (censored).
LadderSample sample_ladder_height(const IncrementModel& model, double barrier, RngStream& rng,
                                  std::uint64_t budget = default_step_budget);

// ---------------------------------------------------------------- parallel engine

/// Work is split into a fixed number of batches. Batch b draws from the
/// stream (seed, tag << 32 | b) and results are combined in batch order, so
/// outputs do not depend on the number of workers.
struct ParallelOptions {
    std::uint64_t seed = 42;
    unsigned workers = 0;  ///< 0: HTWK_WORKERS, else hardware concurrency
    std::size_t batches = 64;
    std::uint64_t step_budget = default_step_budget;
};

unsigned resolve_workers(unsigned requested);

/// Calls fn(batch, first, last, rng) for the item ranges of each batch.
void run_batches(std::size_t items, std::uint64_t tag, const ParallelOptions& opt,
                 const std::function<void(std::size_t, std::size_t, std::size_t, RngStream&)>& fn);

/// Stream tags, one per kind of experiment.
namespace stream_tag {
inline constexpr std::uint64_t cycles = 1;
inline constexpr std::uint64_t sup = 2;
inline constexpr std::uint64_t ladder = 3;
inline constexpr std::uint64_t renewal = 4;
inline constexpr std::uint64_t geometric_sum = 5;
inline constexpr std::uint64_t geometric_sum_control = 6;
inline constexpr std::uint64_t gplus_renewal = 7;
}  // namespace stream_tag

// ---------------------------------------------------------------- batch estimators

struct CycleSample {
    std::uint64_t seed = 0;
    std::vector<double> tau;
    std::vector<double> m_tau;
    std::vector<double> chi;
};

CycleSample simulate_cycles(const IncrementModel& model, std::size_t cycles, const ParallelOptions& opt);

struct WilsonInterval {
    double lo = 0.0;
    double hi = 0.0;
};

/// 95% Wilson score interval for k successes out of n.
WilsonInterval wilson_interval(std::uint64_t k, std::uint64_t n, double z = 1.959963984540054);

struct MtauTail {
    std::vector<double> xs;
    std::vector<std::uint64_t> hits;
    std::vector<double> p_hat;
    std::vector<WilsonInterval> ci;
    std::uint64_t cycles = 0;
    double tau_mean = 0.0;
    double tau_se = 0.0;
    double s_tau_mean = 0.0;  ///< mean of S_tau = -chi
    /// Mean and standard error of S_tau - E[xi] tau, for the Wald identity
    /// (only when the increment mean is supplied).
    double wald_mean = 0.0;
    double wald_se = 0.0;
    std::uint64_t min_s_prev_violations = 0;  ///< cycles with S_{tau-1} < 0 (must be 0)
};

/// Exceedance counts of M_tau over independent cycles.
MtauTail mtau_tail_estimate(const IncrementModel& model, const std::vector<double>& xs, std::size_t cycles,
                            const ParallelOptions& opt, double increment_mean = 0.0);

struct SupSample {
    double barrier = 0.0;
    std::vector<double> m;  ///< in batch order
    std::uint64_t zeros = 0;
    double p_hat = 0.0;
    double p_se = 0.0;
    double escape_estimate = 0.0;  ///< fraction of samples with M > B
    bool bias_flag = false;
};

SupSample sample_sup(const IncrementModel& model, std::size_t n, double barrier, const ParallelOptions& opt,
                     double bias_threshold = 1e-4);

struct LadderBatch {
    double barrier = 0.0;
    std::vector<double> psi;  ///< uncensored heights in batch order
    std::uint64_t censored = 0;
    std::uint64_t total = 0;
    double censored_fraction() const { return total ? double(censored) / double(total) : 0.0; }
};

LadderBatch sample_ladder_heights(const IncrementModel& model, std::size_t n, double barrier,
                                  const ParallelOptions& opt, std::uint64_t tag = stream_tag::ladder);

/// Samples psi_1 + ... + psi_nu with P(nu = n) = p (1 - p)^n, each psi an
/// uncensored ladder height drawn afresh (censored attempts are redrawn).
std::vector<double> sample_geometric_sums(const IncrementModel& model, std::size_t n, double p, double barrier,
                                          const ParallelOptions& opt, std::uint64_t tag);

struct RenewalEstimate {
    std::vector<double> xs;
    std::vector<double> h;   ///< mean of 1 + #{k >= 1 : chi_1 + ... + chi_k <= x}
    std::vector<double> se;
    std::size_t reps = 0;
    /// Renewal epochs T_k <= horizon, k >= 1, pooled over replications.
    std::vector<double> epochs;
};

/// Renewal function of the descending ladder heights chi; epochs up to
/// xs.back() are kept when keep_epochs is set.
RenewalEstimate renewal_estimate(const IncrementModel& model, const std::vector<double>& xs, std::size_t reps,
                                 const ParallelOptions& opt, bool keep_epochs = false,
                                 std::uint64_t tag = stream_tag::renewal);

/// Per replication values of sum over renewal epochs 0 = T_0 < T_1 < ... <= horizon
/// of g(T_k, x) for each probe x; returns means and standard errors.
struct RenewalFunctional {
    std::vector<double> xs;
    std::vector<double> mean;
    std::vector<double> se;
    std::size_t reps = 0;
};

RenewalFunctional renewal_functional(const IncrementModel& model, const std::vector<double>& xs,
                                     std::size_t reps, double horizon,
                                     const std::function<double(double, double)>& g, const ParallelOptions& opt,
                                     std::uint64_t tag = stream_tag::gplus_renewal);

/// Two-sample Kolmogorov-Smirnov distance.
double ks_distance(std::vector<double> a, std::vector<double> b);

// ---------------------------------------------------------------- raw files

/// "HTWK1", u64 count, u64 seed, then columns tau, m_tau, chi as
/// little-endian float64.
void write_cycles(std::ostream& out, const CycleSample& sample);
CycleSample read_cycles(std::istream& in);

}  // namespace htwk
