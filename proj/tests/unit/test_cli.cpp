#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "htwk/cli.hpp"

using namespace htwk::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("htwk_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "htwk");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return run_command(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("probe grids") {
    CHECK(parse_probes("50, 100,200") == std::vector<double>{50, 100, 200});
    const auto lin = parse_probes("0:1e4:5");
    CHECK(lin == std::vector<double>{0, 2500, 5000, 7500, 10000});
    const auto geo = parse_probes("1:1e4:5");
    CHECK(geo.size() == 5);
    CHECK(geo[2] == doctest::Approx(100.0));
    CHECK(geo.back() == 1e4);
    CHECK(parse_probes("0:1").size() == 41);
    CHECK_THROWS_AS(parse_probes("5:1"), ConfigError);
    CHECK_THROWS_AS(parse_probes("1:2:3:4"), ConfigError);
    CHECK_THROWS_AS(parse_probes("1,x"), ConfigError);
}

TEST_CASE("config keys, comments and validation") {
    const fs::path dir = scratch("config");
    std::ofstream(dir / "a.conf") << "# comment\n"
                                     "model = \"mix(0.5: point(1), 0.5: neg(pareto(0.5,1)))\"  # trailing\n"
                                     "seed = 7\n"
                                     "probes = 1:100:3\n"
                                     "independent_pools = true\n";
    const auto cfg = load_config((dir / "a.conf").string());
    CHECK(cfg.model == "mix(0.5: point(1), 0.5: neg(pareto(0.5,1)))");
    CHECK(cfg.seed == 7u);
    CHECK(cfg.probes.size() == 3);
    CHECK(cfg.independent_pools);

    ExperimentConfig c;
    CHECK_THROWS_AS(c.set("colour", "red"), ConfigError);
    CHECK_THROWS_AS(c.set("cycles", "1.5"), ConfigError);
    c.set("probes", "3,2");
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.set("probes", "2,3");
    c.set("reps", "0");
    CHECK_THROWS_AS(c.validate(), ConfigError);

    std::ofstream(dir / "bad.conf") << "seed 7\n";
    CHECK_THROWS_AS(load_config((dir / "bad.conf").string()), ConfigError);
}

TEST_CASE("exit code 1 for config and model errors") {
    CHECK(run({"nosuch"}) == 1);
    CHECK(run({"tails", "--model", "pareto(-1,1)"}) == 1);
    CHECK(run({"simulate", "--cycles", "10"}) == 1);  // no seed
    CHECK(run({"verify", "--config", "/nonexistent/htwk.conf", "--seed", "1"}) == 1);
    CHECK(run({"tails", "--probes", "3,2"}) == 1);
}

TEST_CASE("tails writes K-normalized curves") {
    const fs::path dir = scratch("tails");
    CHECK(run({"tails", "--probes", "0:100:3", "--out", dir.string()}) == 0);
    const std::string csv = slurp(dir / "tails.csv");
    CHECK(csv.rfind("x,F_tail,m,x_over_m,G1_tail,GH_tail\n0,0.5,0,2,1,1\n", 0) == 0);
    CHECK(csv.find('\r') == std::string::npos);
}

TEST_CASE("simulate writes the columnar file") {
    const fs::path dir = scratch("simulate");
    CHECK(run({"simulate", "--seed", "3", "--cycles", "1000", "--out", dir.string()}) == 0);
    const std::string raw = slurp(dir / "cycles.htwk1");
    CHECK(raw.substr(0, 5) == "HTWK1");
    CHECK(raw.size() == 5 + 16 + 3 * 8 * 1000);
    CHECK(fs::exists(dir / "simulate_summary.json"));
}

TEST_CASE("verify report is byte-identical across worker counts") {
    const fs::path dir = scratch("verify");
    std::ofstream(dir / "small.conf") << "seed = 5\n"
                                         "cycles = 100000\n"
                                         "reps = 2000\n"
                                         "sup_samples = 5000\n"
                                         "ladder_samples = 20000\n"
                                         "barrier = 1000\n"
                                         "horizon = 10000\n"
                                         "probes = 20, 50\n"
                                         "renewal_probes = 100, 1000\n";
    const std::string conf = (dir / "small.conf").string();
    const int a = run({"verify", "--config", conf, "--workers", "1", "--out", (dir / "a").string()});
    const int b = run({"verify", "--config", conf, "--workers", "3", "--out", (dir / "b").string()});
    CHECK(a == b);
    CHECK((a == 0 || a == 2 || a == 3));
    const std::string ra = slurp(dir / "a" / "report.json");
    CHECK(!ra.empty());
    CHECK(ra == slurp(dir / "b" / "report.json"));
    CHECK(ra.find("\"schema\": \"htwk-report/1\"") != std::string::npos);
    CHECK(fs::exists(dir / "a" / "report.runtime.json"));
    CHECK(fs::exists(dir / "a" / "main_theorem_probes.csv"));
}
