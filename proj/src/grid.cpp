#include "htwk/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace htwk {

GridDistribution::GridDistribution(std::vector<double> knots, std::vector<double> tails, Interp interp)
    : knots_(std::move(knots)), tails_(std::move(tails)), interp_(interp) {
    if (knots_.empty() || knots_.size() != tails_.size()) {
        throw PreconditionError("grid needs matching, non-empty knot and tail vectors");
    }
    if (knots_.front() != 0.0) throw PreconditionError("grid knots must start at 0");
    for (std::size_t i = 1; i < knots_.size(); ++i) {
        if (!(knots_[i] > knots_[i - 1])) throw PreconditionError("grid knots must increase strictly");
        if (tails_[i] > tails_[i - 1]) throw PreconditionError("grid tail must be nonincreasing");
    }
    if (tails_.front() > 1.0 || tails_.back() < 0.0) throw PreconditionError("grid tail outside [0, 1]");
}

GridDistribution GridDistribution::point_mass(double c) {
    if (c < 0) throw PreconditionError("point mass must sit at c >= 0");
    if (c == 0.0) return GridDistribution({0.0}, {0.0}, Interp::atomic);
    return GridDistribution({0.0, c}, {1.0, 0.0}, Interp::atomic);
}

GridDistribution GridDistribution::zero_on(const std::vector<double>& knots, Interp interp) {
    return GridDistribution(knots, std::vector<double>(knots.size(), 0.0), interp);
}

GridDistribution GridDistribution::from_atoms(std::vector<std::pair<double, double>> atoms) {
    std::sort(atoms.begin(), atoms.end());
    std::vector<double> knots{0.0};
    std::vector<double> masses{0.0};
    double total = 0.0;
    for (const auto& [loc, mass] : atoms) {
        if (loc < 0 || mass < 0) throw PreconditionError("atoms need location >= 0 and mass >= 0");
        total += mass;
        if (loc == knots.back()) {
            masses.back() += mass;
        } else {
            knots.push_back(loc);
            masses.push_back(mass);
        }
    }
    if (total > 1.0 + 1e-12) throw PreconditionError("atom masses exceed 1");
    std::vector<double> tails(knots.size());
    double below = 0.0;
    for (std::size_t i = 0; i < knots.size(); ++i) {
        below += masses[i];
        tails[i] = std::max(0.0, 1.0 - below);
    }
    if (total >= 1.0 - 1e-12) tails.back() = 0.0;
    for (std::size_t i = 1; i < tails.size(); ++i) tails[i] = std::min(tails[i], tails[i - 1]);
    return GridDistribution(std::move(knots), std::move(tails), Interp::atomic);
}

GridDistribution GridDistribution::empirical(std::vector<double> sample) {
    if (sample.empty()) throw PreconditionError("empirical law of an empty sample");
    std::sort(sample.begin(), sample.end());
    const double w = 1.0 / static_cast<double>(sample.size());
    std::vector<std::pair<double, double>> atoms;
    for (double v : sample) {
        if (!atoms.empty() && atoms.back().first == v) {
            atoms.back().second += w;
        } else {
            atoms.emplace_back(v, w);
        }
    }
    return from_atoms(std::move(atoms));
}

double GridDistribution::effective_horizon() const {
    return tails_.back() > 0.0 ? knots_.back() : std::numeric_limits<double>::infinity();
}

double GridDistribution::tail(double x) const {
    if (x < 0.0) return 1.0;
    const double top = knots_.back();
    if (x >= top) {
        if (x > top * (1.0 + 1e-12) && tails_.back() > 0.0) {
            throw HorizonError("grid tail queried beyond x_max");
        }
        return tails_.back();
    }
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
    const double a = tails_[i];
    if (interp_ == Interp::atomic) return a;
    const double b = tails_[i + 1];
    const double t0 = knots_[i];
    const double t1 = knots_[i + 1];
    if (i == 0 || a <= 0.0 || b <= 0.0) return a + (b - a) * (x - t0) / (t1 - t0);
    const double s = std::log(x / t0) / std::log(t1 / t0);
    return a * std::exp(s * std::log(b / a));
}

std::vector<double> geometric_knots(const GridOptions& opt) {
    if (!(opt.x_max > opt.t_min) || opt.t_min <= 0 || opt.points_per_decade < 1) {
        throw PreconditionError("invalid grid options");
    }
    std::vector<double> knots{0.0};
    const double ppd = opt.points_per_decade;
    long k = static_cast<long>(std::ceil(ppd * std::log10(opt.t_min) - 1e-9));
    for (;; ++k) {
        double t = std::pow(10.0, static_cast<double>(k) / ppd);
        if (t >= opt.x_max * (1.0 - 1e-12)) break;
        knots.push_back(t);
    }
    knots.push_back(opt.x_max);
    return knots;
}

GridDistribution grid_discretize(const std::function<double(double)>& tail,
                                 const std::vector<double>& knots,
                                 GridDistribution::Interp interp) {
    std::vector<double> tails(knots.size());
    for (std::size_t i = 0; i < knots.size(); ++i) {
        tails[i] = std::clamp(tail(knots[i]), 0.0, 1.0);
        if (i > 0 && tails[i] > tails[i - 1]) {
            // Quadrature noise is tolerated; genuine increases are not.
            if (tails[i] - tails[i - 1] > 1e-12 * std::max(1e-300, tails[i - 1]) + 1e-300) {
                throw PreconditionError("tail is not nonincreasing at t = " + std::to_string(knots[i]));
            }
            tails[i] = tails[i - 1];
        }
    }
    return GridDistribution(knots, std::move(tails), interp);
}

GridDistribution grid_discretize(const std::function<double(double)>& tail, const GridOptions& opt,
                                 GridDistribution::Interp interp) {
    return grid_discretize(tail, geometric_knots(opt), interp);
}

namespace {

// Integral of Y-tail(x - u) against the law of X over u in [0, x/2].
double half_stieltjes(const GridDistribution& X, const GridDistribution& Y, double x) {
    const double half = 0.5 * x;
    const auto& t = X.knots();
    double s = X.atom_at_zero() * Y.tail(x);
    for (std::size_t i = 1; i < t.size() && t[i - 1] < half; ++i) {
        const double lo = t[i - 1];
        const double hi = std::min(t[i], half);
        const double mass = (hi == t[i]) ? X.cell_mass(i) : X.tail(lo) - X.tail(hi);
        if (mass > 0.0) s += mass * Y.tail(x - 0.5 * (lo + hi));
    }
    return s;
}

double atomic_sum_tail(const GridDistribution& A, const GridDistribution& B, double x) {
    if (x > A.effective_horizon()) throw HorizonError("atomic operand horizon exceeded");
    const auto& t = A.knots();
    double s = A.tail(x);
    for (std::size_t i = 0; i < t.size() && t[i] <= x; ++i) {
        const double mass = (i == 0) ? A.atom_at_zero() : A.cell_mass(i);
        if (mass > 0.0) s += mass * B.tail(x - t[i]);
    }
    return s;
}

void make_monotone(std::vector<double>& tails) {
    for (std::size_t i = 0; i < tails.size(); ++i) {
        tails[i] = std::clamp(tails[i], 0.0, 1.0);
        if (i > 0) tails[i] = std::min(tails[i], tails[i - 1]);
    }
}

}  // namespace

double sum_tail(const GridDistribution& a, const GridDistribution& b, double x) {
    if (x < 0.0) return 1.0;
    if (a.atomic()) return atomic_sum_tail(a, b, x);
    if (b.atomic()) return atomic_sum_tail(b, a, x);
    if (x > a.x_max() * (1 + 1e-12) || x > b.x_max() * (1 + 1e-12)) {
        throw HorizonError("convolution tail requested beyond x_max");
    }
    const double half = 0.5 * x;
    return half_stieltjes(a, b, x) + half_stieltjes(b, a, x) + a.tail(half) * b.tail(half);
}

GridDistribution grid_convolve(const GridDistribution& a, const GridDistribution& b) {
    using Interp = GridDistribution::Interp;
    if (a.atomic() && b.atomic()) {
        const double horizon = std::min(a.effective_horizon(), b.effective_horizon());
        std::vector<std::pair<double, double>> sums;
        auto mass_of = [](const GridDistribution& g, std::size_t i) {
            return i == 0 ? g.atom_at_zero() : g.cell_mass(i);
        };
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double ma = mass_of(a, i);
            if (ma <= 0.0) continue;
            for (std::size_t j = 0; j < b.size(); ++j) {
                const double mb = mass_of(b, j);
                const double loc = a.knots()[i] + b.knots()[j];
                if (mb > 0.0 && loc <= horizon) sums.emplace_back(loc, ma * mb);
            }
        }
        if (std::isfinite(horizon)) sums.emplace_back(horizon, 0.0);
        return GridDistribution::from_atoms(std::move(sums));
    }
    const GridDistribution& cont = a.atomic() ? b : a;
    const GridDistribution& other = a.atomic() ? a : b;
    if (!other.atomic() && other.knots() != cont.knots()) {
        throw PreconditionError("continuous grids must share knots to be convolved");
    }
    std::vector<double> knots;
    for (double t : cont.knots()) {
        if (t <= other.effective_horizon()) knots.push_back(t);
    }
    std::vector<double> tails(knots.size());
    for (std::size_t i = 0; i < knots.size(); ++i) tails[i] = sum_tail(a, b, knots[i]);
    make_monotone(tails);
    return GridDistribution(std::move(knots), std::move(tails), Interp::log_linear);
}

GridDistribution grid_conv_power(const GridDistribution& g, int n, double defect_bound) {
    if (n < 0) throw PreconditionError("convolution power needs n >= 0");
    if (n == 0) {
        return g.atomic() ? GridDistribution::point_mass(0.0)
                          : GridDistribution::zero_on(g.knots(), g.interp());
    }
    GridDistribution out = g;
    for (int k = 2; k <= n; ++k) out = grid_convolve(out, g);
    if (out.horizon_mass() > defect_bound) {
        throw HorizonError("convolution power loses " + std::to_string(out.horizon_mass()) +
                           " mass beyond x_max; increase x_max");
    }
    return out;
}

GridDistribution grid_mixture(const std::vector<std::pair<double, GridDistribution>>& parts) {
    if (parts.empty()) throw PreconditionError("empty mixture");
    const auto& knots = parts.front().second.knots();
    double total = 0.0;
    bool any_continuous = false;
    for (const auto& [w, g] : parts) {
        if (g.knots() != knots) throw PreconditionError("mixture components must share knots");
        if (w < 0) throw PreconditionError("negative mixture weight");
        total += w;
        any_continuous = any_continuous || !g.atomic();
    }
    std::vector<double> tails(knots.size(), 0.0);
    for (const auto& [w, g] : parts) {
        for (std::size_t i = 0; i < knots.size(); ++i) tails[i] += (w / total) * g.tails()[i];
    }
    make_monotone(tails);
    return GridDistribution(knots, std::move(tails),
                            any_continuous ? GridDistribution::Interp::log_linear
                                           : GridDistribution::Interp::atomic);
}

}  // namespace htwk
