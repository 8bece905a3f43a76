#include "htwk/walksim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <istream>
#include <mutex>
#include <ostream>
#include <thread>

namespace htwk {

double sample_increment(const IncrementModel& model, RngStream& rng) { return model.sample(rng); }

CycleOutcome run_cycle(const IncrementModel& model, RngStream& rng, std::uint64_t budget) {
    double s = 0.0;
    double top = 0.0;
    for (std::uint64_t n = 1; n <= budget; ++n) {
        const double prev = s;
        s += model.sample(rng);
        if (s > top) top = s;
        if (s < 0.0) return {n, top, -s, prev};
    }
    throw BudgetError("cycle did not end within " + std::to_string(budget) + " steps");
}

SupEstimate estimate_sup(const IncrementModel& model, double barrier, RngStream& rng, std::uint64_t budget) {
    if (!(barrier > 0.0)) throw PreconditionError("barrier must be positive");
    double s = 0.0;
    double top = 0.0;
    for (std::uint64_t n = 1; n <= budget; ++n) {
        s += model.sample(rng);
        if (s > top) {
            top = s;
        } else if (s <= top - barrier) {
            return {top, top == 0.0, barrier, false, n};
        }
    }
    throw BudgetError("supremum search did not stop within " + std::to_string(budget) + " steps");
}

LadderSample sample_ladder_height(const IncrementModel& model, double barrier, RngStream& rng,
                                  std::uint64_t budget) {
    if (!(barrier > 0.0)) throw PreconditionError("barrier must be positive");
    double s = 0.0;
    for (std::uint64_t n = 1; n <= budget; ++n) {
        s += model.sample(rng);
        if (s > 0.0) return {s, n, false};
        if (s <= -barrier) return {0.0, n, true};
    }
    throw BudgetError("ladder search did not stop within " + std::to_string(budget) + " steps");
}

// ---------------------------------------------------------------- engine

unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("HTWK_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
        throw PreconditionError("HTWK_WORKERS must be a positive integer");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void run_batches(std::size_t items, std::uint64_t tag, const ParallelOptions& opt,
                 const std::function<void(std::size_t, std::size_t, std::size_t, RngStream&)>& fn) {
    if (items == 0) return;
    const std::size_t batches = std::max<std::size_t>(1, std::min(opt.batches, items));
    const unsigned workers = std::min<unsigned>(resolve_workers(opt.workers), static_cast<unsigned>(batches));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= batches) return;
            try {
                RngStream rng(opt.seed, (tag << 32) | b);
                fn(b, b * items / batches, (b + 1) * items / batches, rng);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(batches);
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
}

namespace {

std::size_t batch_count(std::size_t items, const ParallelOptions& opt) {
    return std::max<std::size_t>(1, std::min(opt.batches, items));
}

}  // namespace

// ---------------------------------------------------------------- estimators

CycleSample simulate_cycles(const IncrementModel& model, std::size_t cycles, const ParallelOptions& opt) {
    CycleSample out;
    out.seed = opt.seed;
    out.tau.resize(cycles);
    out.m_tau.resize(cycles);
    out.chi.resize(cycles);
    run_batches(cycles, stream_tag::cycles, opt, [&](std::size_t, std::size_t first, std::size_t last, RngStream& rng) {
        for (std::size_t i = first; i < last; ++i) {
            const CycleOutcome c = run_cycle(model, rng, opt.step_budget);
            out.tau[i] = static_cast<double>(c.tau);
            out.m_tau[i] = c.m_tau;
            out.chi[i] = c.chi;
        }
    });
    return out;
}

WilsonInterval wilson_interval(std::uint64_t k, std::uint64_t n, double z) {
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    return {k == 0 ? 0.0 : std::max(0.0, centre - half), k == n ? 1.0 : std::min(1.0, centre + half)};
}

MtauTail mtau_tail_estimate(const IncrementModel& model, const std::vector<double>& xs, std::size_t cycles,
                            const ParallelOptions& opt, double increment_mean) {
    if (cycles == 0) throw PreconditionError("cycles must be >= 1");
    struct Acc {
        std::vector<std::uint64_t> hits;
        double tau = 0, tau2 = 0, s = 0, w = 0, w2 = 0;
        std::uint64_t bad = 0;
    };
    std::vector<Acc> acc(batch_count(cycles, opt));
    run_batches(cycles, stream_tag::cycles, opt, [&](std::size_t b, std::size_t first, std::size_t last, RngStream& rng) {
        Acc a;
        a.hits.assign(xs.size(), 0);
        for (std::size_t i = first; i < last; ++i) {
            const CycleOutcome c = run_cycle(model, rng, opt.step_budget);
            for (std::size_t j = 0; j < xs.size(); ++j) a.hits[j] += c.m_tau > xs[j];
            const double t = static_cast<double>(c.tau);
            a.tau += t;
            a.tau2 += t * t;
            a.s -= c.chi;
            const double w = -c.chi - increment_mean * t;
            a.w += w;
            a.w2 += w * w;
            a.bad += c.s_prev < 0.0;
        }
        acc[b] = std::move(a);
    });
    MtauTail out;
    out.xs = xs;
    out.cycles = cycles;
    out.hits.assign(xs.size(), 0);
    double tau = 0, tau2 = 0, s = 0, w = 0, w2 = 0;
    for (const auto& a : acc) {
        for (std::size_t j = 0; j < xs.size(); ++j) out.hits[j] += a.hits[j];
        tau += a.tau;
        tau2 += a.tau2;
        s += a.s;
        w += a.w;
        w2 += a.w2;
        out.min_s_prev_violations += a.bad;
    }
    const double n = static_cast<double>(cycles);
    for (std::size_t j = 0; j < xs.size(); ++j) {
        out.p_hat.push_back(static_cast<double>(out.hits[j]) / n);
        out.ci.push_back(wilson_interval(out.hits[j], cycles));
    }
    out.tau_mean = tau / n;
    out.tau_se = cycles > 1 ? std::sqrt(std::max(0.0, (tau2 / n - out.tau_mean * out.tau_mean) / (n - 1))) : 0.0;
    out.s_tau_mean = s / n;
    out.wald_mean = w / n;
    out.wald_se = cycles > 1 ? std::sqrt(std::max(0.0, (w2 / n - out.wald_mean * out.wald_mean) / (n - 1))) : 0.0;
    return out;
}

SupSample sample_sup(const IncrementModel& model, std::size_t n, double barrier, const ParallelOptions& opt,
                     double bias_threshold) {
    if (n == 0) throw PreconditionError("sample size must be >= 1");
    SupSample out;
    out.barrier = barrier;
    out.m.resize(n);
    run_batches(n, stream_tag::sup, opt, [&](std::size_t, std::size_t first, std::size_t last, RngStream& rng) {
        for (std::size_t i = first; i < last; ++i) out.m[i] = estimate_sup(model, barrier, rng, opt.step_budget).m_value;
    });
    std::uint64_t escapes = 0;
    for (double v : out.m) {
        out.zeros += v == 0.0;
        escapes += v > barrier;
    }
    const double nn = static_cast<double>(n);
    out.p_hat = static_cast<double>(out.zeros) / nn;
    out.p_se = std::sqrt(out.p_hat * (1.0 - out.p_hat) / nn);
    out.escape_estimate = static_cast<double>(escapes) / nn;
    out.bias_flag = out.escape_estimate > bias_threshold;
    return out;
}

LadderBatch sample_ladder_heights(const IncrementModel& model, std::size_t n, double barrier,
                                  const ParallelOptions& opt, std::uint64_t tag) {
    if (n == 0) throw PreconditionError("sample size must be >= 1");
    std::vector<double> psi(n);
    std::vector<char> censored(n);
    run_batches(n, tag, opt, [&](std::size_t, std::size_t first, std::size_t last, RngStream& rng) {
        for (std::size_t i = first; i < last; ++i) {
            const LadderSample l = sample_ladder_height(model, barrier, rng, opt.step_budget);
            psi[i] = l.psi;
            censored[i] = l.censored;
        }
    });
    LadderBatch out;
    out.barrier = barrier;
    out.total = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (censored[i]) {
            ++out.censored;
        } else {
            out.psi.push_back(psi[i]);
        }
    }
    return out;
}

std::vector<double> sample_geometric_sums(const IncrementModel& model, std::size_t n, double p, double barrier,
                                          const ParallelOptions& opt, std::uint64_t tag) {
    if (!(p > 0.0 && p <= 1.0)) throw PreconditionError("geometric parameter must lie in (0, 1]");
    std::vector<double> out(n);
    run_batches(n, tag, opt, [&](std::size_t, std::size_t first, std::size_t last, RngStream& rng) {
        for (std::size_t i = first; i < last; ++i) {
            const double u = rng.uniform();
            const std::uint64_t nu =
                p >= 1.0 ? 0 : static_cast<std::uint64_t>(std::floor(std::log(u) / std::log1p(-p)));
            double sum = 0.0;
            for (std::uint64_t k = 0; k < nu; ++k) {
                LadderSample l;
                do {
                    l = sample_ladder_height(model, barrier, rng, opt.step_budget);
                } while (l.censored);
                sum += l.psi;
            }
            out[i] = sum;
        }
    });
    return out;
}

RenewalEstimate renewal_estimate(const IncrementModel& model, const std::vector<double>& xs, std::size_t reps,
                                 const ParallelOptions& opt, bool keep_epochs, std::uint64_t tag) {
    if (reps == 0) throw PreconditionError("reps must be >= 1");
    if (xs.empty()) throw PreconditionError("renewal estimate needs probes");
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (!(xs[i] > xs[i - 1])) throw PreconditionError("probes must increase strictly");
    }
    struct Acc {
        std::vector<double> sum, sum2, epochs;
    };
    const double top = xs.back();
    std::vector<Acc> acc(batch_count(reps, opt));
    run_batches(reps, tag, opt, [&](std::size_t b, std::size_t first, std::size_t last, RngStream& rng) {
        Acc a;
        a.sum.assign(xs.size(), 0.0);
        a.sum2.assign(xs.size(), 0.0);
        std::vector<double> count(xs.size());
        for (std::size_t r = first; r < last; ++r) {
            std::fill(count.begin(), count.end(), 0.0);
            double t = 0.0;
            for (;;) {
                t += run_cycle(model, rng, opt.step_budget).chi;
                if (t > top) break;
                if (keep_epochs) a.epochs.push_back(t);
                const auto j = std::lower_bound(xs.begin(), xs.end(), t) - xs.begin();
                count[static_cast<std::size_t>(j)] += 1.0;
            }
            double running = 0.0;
            for (std::size_t j = 0; j < xs.size(); ++j) {
                running += count[j];
                const double h = xs[j] < 0.0 ? 0.0 : 1.0 + running;
                a.sum[j] += h;
                a.sum2[j] += h * h;
            }
        }
        acc[b] = std::move(a);
    });
    RenewalEstimate out;
    out.xs = xs;
    out.reps = reps;
    std::vector<double> sum(xs.size()), sum2(xs.size());
    for (auto& a : acc) {
        for (std::size_t j = 0; j < xs.size(); ++j) {
            sum[j] += a.sum[j];
            sum2[j] += a.sum2[j];
        }
        out.epochs.insert(out.epochs.end(), a.epochs.begin(), a.epochs.end());
    }
    const double n = static_cast<double>(reps);
    for (std::size_t j = 0; j < xs.size(); ++j) {
        const double mean = sum[j] / n;
        out.h.push_back(mean);
        out.se.push_back(reps > 1 ? std::sqrt(std::max(0.0, (sum2[j] / n - mean * mean) / (n - 1))) : 0.0);
    }
    return out;
}

RenewalFunctional renewal_functional(const IncrementModel& model, const std::vector<double>& xs,
                                     std::size_t reps, double horizon,
                                     const std::function<double(double, double)>& g, const ParallelOptions& opt,
                                     std::uint64_t tag) {
    if (reps == 0) throw PreconditionError("reps must be >= 1");
    struct Acc {
        std::vector<double> sum, sum2;
    };
    std::vector<Acc> acc(batch_count(reps, opt));
    run_batches(reps, tag, opt, [&](std::size_t b, std::size_t first, std::size_t last, RngStream& rng) {
        Acc a;
        a.sum.assign(xs.size(), 0.0);
        a.sum2.assign(xs.size(), 0.0);
        std::vector<double> v(xs.size());
        for (std::size_t r = first; r < last; ++r) {
            for (std::size_t j = 0; j < xs.size(); ++j) v[j] = g(0.0, xs[j]);
            double t = 0.0;
            for (;;) {
                t += run_cycle(model, rng, opt.step_budget).chi;
                if (t > horizon) break;
                for (std::size_t j = 0; j < xs.size(); ++j) v[j] += g(t, xs[j]);
            }
            for (std::size_t j = 0; j < xs.size(); ++j) {
                a.sum[j] += v[j];
                a.sum2[j] += v[j] * v[j];
            }
        }
        acc[b] = std::move(a);
    });
    RenewalFunctional out;
    out.xs = xs;
    out.reps = reps;
    const double n = static_cast<double>(reps);
    for (std::size_t j = 0; j < xs.size(); ++j) {
        double s = 0.0, s2 = 0.0;
        for (const auto& a : acc) {
            s += a.sum[j];
            s2 += a.sum2[j];
        }
        const double mean = s / n;
        out.mean.push_back(mean);
        out.se.push_back(reps > 1 ? std::sqrt(std::max(0.0, (s2 / n - mean * mean) / (n - 1))) : 0.0);
    }
    return out;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw PreconditionError("KS distance of an empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

// ---------------------------------------------------------------- raw files

namespace {

constexpr char kMagic[5] = {'H', 'T', 'W', 'K', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw Error("truncated cycle file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void put_column(std::ostream& out, const std::vector<double>& col) {
    for (double x : col) {
        std::uint64_t bits;
        std::memcpy(&bits, &x, 8);
        put_u64(out, bits);
    }
}

std::vector<double> get_column(std::istream& in, std::uint64_t n) {
    std::vector<double> col(n);
    for (auto& x : col) {
        const std::uint64_t bits = get_u64(in);
        std::memcpy(&x, &bits, 8);
    }
    return col;
}

}  // namespace

void write_cycles(std::ostream& out, const CycleSample& sample) {
    const std::size_t n = sample.tau.size();
    if (sample.m_tau.size() != n || sample.chi.size() != n) throw PreconditionError("ragged cycle columns");
    out.write(kMagic, sizeof kMagic);
    put_u64(out, n);
    put_u64(out, sample.seed);
    put_column(out, sample.tau);
    put_column(out, sample.m_tau);
    put_column(out, sample.chi);
}

CycleSample read_cycles(std::istream& in) {
    char magic[5];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw Error("not a HTWK1 cycle file");
    CycleSample s;
    const std::uint64_t n = get_u64(in);
    s.seed = get_u64(in);
    s.tau = get_column(in, n);
    s.m_tau = get_column(in, n);
    s.chi = get_column(in, n);
    return s;
}

}  // namespace htwk
