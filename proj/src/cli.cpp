#include "htwk/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "htwk/classlab.hpp"
#include "htwk/distspec.hpp"
#include "htwk/tailmath.hpp"
#include "htwk/verify.hpp"
#include "htwk/walksim.hpp"

namespace htwk::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string unquote(std::string v) {
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
        return v.substr(1, v.size() - 2);
    }
    return v;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty()) throw ConfigError("key '" + key + "': not a number: '" + v + "'");
    return d;
}

std::uint64_t to_count(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    if (!(d >= 0) || d != std::floor(d) || d > 1.8e19) {
        throw ConfigError("key '" + key + "': not a nonnegative integer: '" + v + "'");
    }
    return static_cast<std::uint64_t>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("key '" + key + "': not a boolean: '" + v + "'");
}

// ---------------------------------------------------------------- output

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    return f;
}

void write_probe_csv(const fs::path& path, const CheckBlock& b) {
    auto f = open_out(path);
    f << "x,simulated,sim_lo,sim_hi,analytic,ratio,ratio_lo,ratio_hi,hits,status\n";
    for (const auto& p : b.probes) {
        f << fmt(p.x) << ',' << fmt(p.simulated) << ',' << fmt(p.sim_lo) << ',' << fmt(p.sim_hi) << ','
          << fmt(p.analytic) << ',' << fmt(p.ratio) << ',' << fmt(p.ratio_lo) << ',' << fmt(p.ratio_hi) << ','
          << p.hits << ',' << verdict_name(p.status) << '\n';
    }
}

void write_block_csvs(const fs::path& dir, const CheckBlock& b) {
    if (!b.probes.empty()) write_probe_csv(dir / (b.name + "_probes.csv"), b);
    for (const auto& c : b.curves) {
        auto f = open_out(dir / (b.name + "_" + c.name + ".csv"));
        c.write_csv(f);
    }
    for (const auto& s : b.subchecks) write_block_csvs(dir, s);
}

void print_block(const CheckBlock& b, int depth) {
    std::printf("%*s%-*s %s", 2 * depth, "", 28 - 2 * depth, b.name.c_str(),
                std::string(verdict_name(b.verdict)).c_str());
    if (!b.note.empty()) std::printf("  (%s)", b.note.c_str());
    std::printf("\n");
    for (const auto& s : b.subchecks) print_block(s, depth + 1);
}

IncrementModel load_model(const ExperimentConfig& cfg) {
    return model_from_spec(cfg.model.empty() ? std::string(distspec::default_model_spec) : cfg.model);
}

ParallelOptions parallel(const ExperimentConfig& cfg, const char* command) {
    if (!cfg.seed) throw ConfigError(std::string(command) + " needs a seed (--seed or 'seed' in the config)");
    ParallelOptions par;
    par.seed = *cfg.seed;
    par.workers = cfg.workers;
    return par;
}

fs::path out_dir(const ExperimentConfig& cfg) {
    fs::path dir(cfg.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + cfg.out + "'");
    return dir;
}

// ---------------------------------------------------------------- subcommands

int cmd_classify(const ExperimentConfig& cfg) {
    const IncrementModel model = load_model(cfg);
    const std::vector<double> xs = !cfg.probes.empty() ? cfg.probes : default_probes();
    const fs::path dir = out_dir(cfg);
    MembershipOptions opt;
    if (cfg.tol) opt.tol_L = opt.tol_D = opt.tol_S = opt.tol_Sstar = opt.tol_SF = *cfg.tol;

    std::optional<GridDistribution> g1;
    std::printf("%-6s %-14s %-14s %-10s %s\n", "kind", "x_last", "ratio_last", "target", "verdict");
    for (const auto& name : cfg.kinds) {
        const MembershipKind kind = parse_membership_kind(name);
        const std::string label(membership_kind_name(kind));
        const GridDistribution* G = nullptr;
        if (kind == MembershipKind::SF) {
            if (!g1) {
                const KResult k = criterion_K(model);
                if (!k.finite) {
                    std::printf("%-6s %s\n", label.c_str(), "n/a (K infinite, no G_1)");
                    continue;
                }
                g1 = g1_grid(G1Tail(model, k.value), probe_knots(xs.back()));
            }
            G = &*g1;
        }
        RatioDiagnostic d;
        try {
            d = membership_curve(kind, model, G, xs, opt);
        } catch (const DivergenceError& e) {
            std::printf("%-6s n/a (%s)\n", label.c_str(), e.what());
            continue;
        }
        auto f = open_out(dir / ("classify_" + label + ".csv"));
        d.write_csv(f);
        const std::string target = d.mode == RatioDiagnostic::Mode::bounded ? "bounded" : fmt(d.target);
        std::printf("%-6s %-14s %-14s %-10s %s\n", label.c_str(), fmt(d.xs.back()).c_str(),
                    fmt(d.ratios.back()).c_str(), target.c_str(), d.pass ? "pass" : "fail");
    }
    return 0;
}

int cmd_tails(const ExperimentConfig& cfg) {
    const IncrementModel model = load_model(cfg);
    const std::vector<double> xs = !cfg.probes.empty() ? cfg.probes : parse_probes("0:1e4");
    const fs::path dir = out_dir(cfg);
    const TruncatedMean m(model);
    const KResult k = criterion_K(model);
    std::printf("K = %s (%s)\n", fmt(k.value).c_str(), k.finite ? "finite" : "divergent; partial sum shown");

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::optional<G1Tail> g1;
    std::optional<RenewalMeasure> h;
    if (k.finite && !m.identically_zero()) {
        g1.emplace(model, k.value);
        h = RenewalMeasure::x_over_m(m);
    }
    auto f = open_out(dir / "tails.csv");
    f << "x,F_tail,m,x_over_m,G1_tail,GH_tail\n";
    for (double x : xs) {
        const bool zero = m.identically_zero();
        f << fmt(x) << ',' << fmt(model.pos_tail(x)) << ',' << fmt(m(x)) << ',' << fmt(zero ? nan : m.ratio(x))
          << ',' << fmt(g1 ? (*g1)(x) : nan) << ',' << fmt(h ? gh_tail(model, *h, x) : nan) << '\n';
    }
    return 0;
}

int cmd_simulate(const ExperimentConfig& cfg) {
    const IncrementModel model = load_model(cfg);
    const ParallelOptions par = parallel(cfg, "simulate");
    const std::vector<double> xs = !cfg.probes.empty() ? cfg.probes : std::vector<double>{50, 100, 200, 500};
    const fs::path dir = out_dir(cfg);
    const CycleSample s = simulate_cycles(model, cfg.cycles, par);
    {
        auto f = open_out(dir / "cycles.htwk1");
        write_cycles(f, s);
    }
    const double n = static_cast<double>(s.tau.size());
    double sum = 0.0, sq = 0.0;
    for (double t : s.tau) {
        sum += t;
        sq += t * t;
    }
    const double tau_mean = sum / n;
    const double tau_se = std::sqrt(std::max(0.0, sq / n - tau_mean * tau_mean) / std::max(1.0, n - 1.0));

    auto f = open_out(dir / "simulate_summary.csv");
    f << "x,hits,p_hat,ci_lo,ci_hi,tau_F\n";
    nlohmann::json probes = nlohmann::json::array();
    for (double x : xs) {
        const auto hits = static_cast<std::uint64_t>(
            std::count_if(s.m_tau.begin(), s.m_tau.end(), [x](double v) { return v > x; }));
        const WilsonInterval ci = wilson_interval(hits, s.tau.size());
        const double p = static_cast<double>(hits) / n;
        const double pred = tau_mean * model.pos_tail(x);
        f << fmt(x) << ',' << hits << ',' << fmt(p) << ',' << fmt(ci.lo) << ',' << fmt(ci.hi) << ',' << fmt(pred)
          << '\n';
        probes.push_back({{"x", x}, {"hits", hits}, {"p_hat", p}, {"ci_lo", ci.lo}, {"ci_hi", ci.hi}});
    }
    nlohmann::json j{{"model", model.spec()}, {"seed", s.seed}, {"cycles", s.tau.size()},
                     {"tau_mean", tau_mean}, {"tau_se", tau_se}, {"probes", probes}};
    auto js = open_out(dir / "simulate_summary.json");
    js << j.dump(2) << '\n';
    std::printf("cycles %zu  E tau %s (se %s)\n", s.tau.size(), fmt(tau_mean).c_str(), fmt(tau_se).c_str());
    return 0;
}

int cmd_renewal(const ExperimentConfig& cfg) {
    const IncrementModel model = load_model(cfg);
    const ParallelOptions par = parallel(cfg, "renewal");
    const std::vector<double> xs = !cfg.probes.empty() ? cfg.probes : cfg.renewal_probes;
    const fs::path dir = out_dir(cfg);
    const RenewalEstimate r = renewal_estimate(model, xs, cfg.reps, par);
    auto f = open_out(dir / "renewal.csv");
    f << "x,h,se,h_over_x\n";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        f << fmt(xs[i]) << ',' << fmt(r.h[i]) << ',' << fmt(r.se[i]) << ','
          << fmt(xs[i] > 0 ? r.h[i] / xs[i] : std::numeric_limits<double>::quiet_NaN()) << '\n';
        std::printf("x %-12s H %-14s se %s\n", fmt(xs[i]).c_str(), fmt(r.h[i]).c_str(), fmt(r.se[i]).c_str());
    }
    return 0;
}

int cmd_verify(const ExperimentConfig& cfg) {
    const IncrementModel model = load_model(cfg);
    const ParallelOptions par = parallel(cfg, "verify");
    const fs::path dir = out_dir(cfg);
    VerificationReport report;
    report.experiment_id = cfg.experiment;
    report.model_spec = model.spec();
    report.seed = par.seed;

    nlohmann::json runtime = nlohmann::json::object();
    const auto start = std::chrono::steady_clock::now();
    for (const auto& check : cfg.checks) {
        const auto t0 = std::chrono::steady_clock::now();
        if (check == "main_theorem") {
            MainTheoremOptions opt;
            if (cfg.tol) opt.tol = *cfg.tol;
            opt.independent_pools = cfg.independent_pools;
            opt.sup_samples = cfg.sup_samples;
            opt.barrier = cfg.barrier;
            const std::vector<double> xs =
                !cfg.probes.empty() ? cfg.probes : std::vector<double>{200, 500, 1000, 2000};
            report.blocks.push_back(main_theorem_report(model, xs, cfg.cycles, par, opt));
        } else if (check == "renewal_bound") {
            RenewalBoundOptions opt;
            opt.tol = cfg.renewal_tol;
            opt.sup_samples = cfg.sup_samples;
            opt.barrier = cfg.barrier;
            report.blocks.push_back(renewal_bound_report(model, cfg.renewal_probes, cfg.reps, par, opt));
        } else if (check == "ladder_identity") {
            report.blocks.push_back(ladder_identity_report(model, cfg.barrier, cfg.sup_samples, par));
        } else if (check == "ladder_height_tail") {
            GplusOptions opt;
            opt.tol = cfg.gplus_tol;
            opt.ladder_samples = cfg.ladder_samples;
            opt.barrier = cfg.barrier;
            opt.horizon = cfg.horizon;
            report.blocks.push_back(gplus_tail_report(model, cfg.gplus_probes, cfg.reps, par, opt));
        } else if (check == "theorem2") {
            Theorem2Options opt;
            opt.tol = cfg.class_tol;
            const std::vector<double> xs = !cfg.class_probes.empty() ? cfg.class_probes : default_probes();
            report.blocks.push_back(theorem2_report(model, xs, opt));
        } else {
            throw ConfigError("unknown check '" + check + "'");
        }
        report.blocks.back().seed = par.seed;
        runtime[check] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    runtime["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    {
        auto f = open_out(dir / "report.json");
        f << report.to_json().dump(2) << '\n';
    }
    {
        auto f = open_out(dir / "report.runtime.json");
        f << runtime.dump(2) << '\n';
    }
    for (const auto& b : report.blocks) {
        write_block_csvs(dir, b);
        print_block(b, 0);
    }
    return exit_code_for(report);
}

}  // namespace

// ---------------------------------------------------------------- config

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
    const std::string v = unquote(trim(raw));
    if (key == "experiment") {
        experiment = v;
    } else if (key == "model") {
        model = v;
    } else if (key == "seed") {
        seed = to_count(key, v);
    } else if (key == "workers") {
        workers = static_cast<unsigned>(to_count(key, v));
    } else if (key == "cycles") {
        cycles = to_count(key, v);
    } else if (key == "reps") {
        reps = to_count(key, v);
    } else if (key == "sup_samples") {
        sup_samples = to_count(key, v);
    } else if (key == "ladder_samples") {
        ladder_samples = to_count(key, v);
    } else if (key == "barrier") {
        barrier = to_double(key, v);
    } else if (key == "horizon") {
        horizon = to_double(key, v);
    } else if (key == "independent_pools") {
        independent_pools = to_bool(key, v);
    } else if (key == "probes") {
        probes = parse_probes(v);
    } else if (key == "renewal_probes") {
        renewal_probes = parse_probes(v);
    } else if (key == "gplus_probes") {
        gplus_probes = parse_probes(v);
    } else if (key == "class_probes") {
        class_probes = parse_probes(v);
    } else if (key == "kinds") {
        kinds = split_list(v);
        for (const auto& k : kinds) parse_membership_kind(k);
    } else if (key == "checks") {
        checks = split_list(v);
    } else if (key == "tol") {
        tol = to_double(key, v);
    } else if (key == "renewal_tol") {
        renewal_tol = to_double(key, v);
    } else if (key == "gplus_tol") {
        gplus_tol = to_double(key, v);
    } else if (key == "class_tol") {
        class_tol = to_double(key, v);
    } else if (key == "out") {
        out = v;
    } else {
        throw ConfigError("unknown key '" + key + "'");
    }
}

void ExperimentConfig::validate() const {
    auto increasing = [](const char* name, const std::vector<double>& xs) {
        for (std::size_t i = 1; i < xs.size(); ++i) {
            if (!(xs[i] > xs[i - 1])) throw ConfigError(std::string(name) + " must be strictly increasing");
        }
    };
    increasing("probes", probes);
    increasing("renewal_probes", renewal_probes);
    increasing("gplus_probes", gplus_probes);
    increasing("class_probes", class_probes);
    if (cycles < 1 || reps < 1 || sup_samples < 1 || ladder_samples < 1) {
        throw ConfigError("cycles, reps, sup_samples and ladder_samples must be at least 1");
    }
    if (!(barrier > 0)) throw ConfigError("barrier must be positive");
    if (tol && !(*tol > 0)) throw ConfigError("tol must be positive");
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig cfg) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string body = line;
        bool quoted = false;
        for (std::size_t i = 0; i < body.size(); ++i) {
            if (body[i] == '"') quoted = !quoted;
            if (body[i] == '#' && !quoted) {
                body.resize(i);
                break;
            }
        }
        body = trim(body);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        try {
            cfg.set(trim(body.substr(0, eq)), body.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

std::vector<double> parse_probes(const std::string& text) {
    const std::string t = trim(unquote(trim(text)));
    if (t.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(t);
        std::string item;
        while (std::getline(ss, item, ':')) parts.push_back(trim(item));
        if (parts.size() < 2 || parts.size() > 3) throw ConfigError("probe range must be a:b or a:b:n");
        const double a = to_double("probes", parts[0]);
        const double b = to_double("probes", parts[1]);
        const std::uint64_t n = parts.size() == 3 ? to_count("probes", parts[2]) : 41;
        if (!(b > a) || n < 2) throw ConfigError("probe range needs a < b and n >= 2");
        std::vector<double> xs(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            const double s = static_cast<double>(i) / static_cast<double>(n - 1);
            xs[i] = a > 0 ? a * std::pow(b / a, s) : a + (b - a) * s;
        }
        xs.front() = a;
        xs.back() = b;
        return xs;
    }
    std::vector<double> xs;
    for (const auto& item : split_list(t)) xs.push_back(to_double("probes", item));
    if (xs.empty()) throw ConfigError("empty probe list");
    return xs;
}

// ---------------------------------------------------------------- entry point

int run_command(int argc, char** argv) {
    CLI::App app{"Tail asymptotics of cycle maxima for random walks with heavy negative jumps"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "htwk 0.1.0");

    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "flat key = value config file");
        auto flag = [&](const char* name, const char* key, const char* help) {
            sub->add_option_function<std::string>(
                name, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); }, help);
        };
        flag("--model", "model", "distribution expression for the increment");
        flag("--seed", "seed", "root seed of the random streams");
        flag("--workers", "workers", "worker threads (fallback: HTWK_WORKERS)");
        flag("--cycles", "cycles", "number of cycles");
        flag("--reps", "reps", "renewal replications");
        flag("--probes,--probe", "probes", "probe grid: x1,x2,... or a:b[:n]");
        flag("--barrier", "barrier", "drop barrier B for sup and ladder sampling");
        flag("--out", "out", "output directory");
        flag("--kinds", "kinds", "membership kinds: L,D,S,Sstar,SF");
        flag("--tol", "tol", "tolerance override");
    };
    CLI::App* classify = app.add_subcommand("classify", "class-membership ratio curves for a model");
    CLI::App* tails = app.add_subcommand("tails", "m, x/m, K, G_1 and G_H tail curves");
    CLI::App* simulate = app.add_subcommand("simulate", "cycle sampling to a columnar file plus summary");
    CLI::App* verify = app.add_subcommand("verify", "full verification report");
    CLI::App* renewal = app.add_subcommand("renewal", "renewal function of descending ladder heights");
    for (auto* sub : {classify, tails, simulate, verify, renewal}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        ExperimentConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        for (const auto& [k, v] : overrides) cfg.set(k, v);
        cfg.validate();
        if (command == "classify") return cmd_classify(cfg);
        if (command == "tails") return cmd_tails(cfg);
        if (command == "simulate") return cmd_simulate(cfg);
        if (command == "renewal") return cmd_renewal(cfg);
        return cmd_verify(cfg);
    } catch (const distspec::ParseError& e) {
        std::fprintf(stderr, "htwk %s: model: %s\n", command.c_str(), e.what());
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "htwk %s: config: %s\n", command.c_str(), e.what());
    } catch (const BudgetError& e) {
        std::fprintf(stderr, "htwk %s: walksim: %s\n", command.c_str(), e.what());
    } catch (const HorizonError& e) {
        std::fprintf(stderr, "htwk %s: grid horizon: %s\n", command.c_str(), e.what());
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "htwk %s: tailmath: %s\n", command.c_str(), e.what());
    } catch (const PreconditionError& e) {
        std::fprintf(stderr, "htwk %s: precondition: %s\n", command.c_str(), e.what());
    } catch (const Error& e) {
        std::fprintf(stderr, "htwk %s: %s\n", command.c_str(), e.what());
    }
    return 1;
}

}  // namespace htwk::cli
