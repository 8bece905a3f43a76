#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "htwk/error.hpp"

namespace htwk::cli {

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Settings shared by all subcommands. Keys in a config file use the field
/// names below; command-line flags override them.
struct ExperimentConfig {
    std::string experiment = "htwk";
    std::string model;
    std::optional<std::uint64_t> seed;
    unsigned workers = 0;
    std::size_t cycles = 10'000'000;
    std::size_t reps = 100'000;
    std::size_t sup_samples = 100'000;
    std::size_t ladder_samples = 1'000'000;
    double barrier = 1e4;
    double horizon = 1e6;
    bool independent_pools = false;

    std::vector<double> probes;  ///< empty: per-command default
    std::vector<double> renewal_probes{1e3, 1e4};
    std::vector<double> gplus_probes{10, 50, 100};
    std::vector<double> class_probes;  ///< empty: 1e2 .. 1e4
    std::vector<std::string> kinds{"L", "D", "S", "Sstar"};
    std::vector<std::string> checks{"main_theorem", "renewal_bound", "ladder_identity", "ladder_height_tail",
                                    "theorem2"};

    std::optional<double> tol;  ///< main theorem (verify) or membership (classify)
    double renewal_tol = 0.15;
    double gplus_tol = 0.2;
    double class_tol = 0.05;
    std::string out = ".";

    /// Sets one key from its text value; throws ConfigError.
    void set(const std::string& key, const std::string& value);
    /// Throws ConfigError when a probe grid is not strictly increasing or a
    /// count is zero.
    void validate() const;
};

/// Flat "key = value" lines; '#' starts a comment; values may be quoted.
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

/// "1,2,5" or "a:b" or "a:b:n" (n points, geometric when a > 0, else linear;
/// n defaults to 41).
std::vector<double> parse_probes(const std::string& text);

/// Entry point behind the htwk tool. Returns 0 on success, 1 on a
/// configuration or precondition error, 2 when a verify run has only
/// inconclusive non-passing verdicts, 3 when any verdict fails.
int run_command(int argc, char** argv);

}  // namespace htwk::cli
