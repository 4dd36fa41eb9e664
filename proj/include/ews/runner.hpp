#pragma once

/// Command-line experiment runner: parses a JSON configuration, runs one named
/// experiment, writes its CSV files and a JSON manifest into the output
/// directory.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ews/experiments.hpp"

namespace ews::cli {

struct RunOptions {
    std::string experiment;
    std::optional<std::filesystem::path> config;
    std::filesystem::path out = "out";
    std::optional<exp::SeedRange> seeds;
    int threads = 1;
};

struct RunReport {
    bool completed = false;  ///< false when validation or the computation failed
    std::string failure;
    std::vector<exp::Check> checks;
    std::vector<std::filesystem::path> files;
    double wall_seconds = 0.0;
    bool all_passed() const;
};

const std::vector<std::string>& experiment_names();

/// Parses "a..b" (or a single number) into an inclusive range.
exp::SeedRange parse_seed_range(std::string_view text);

/// Runs one experiment. Errors are reported in the returned record and the
/// manifest; only an unwritable output directory throws.
RunReport run(const RunOptions& opt);

/// Exit status: 0 when every check passed, 1 when a check failed, 2 when the
/// run did not complete.
int exit_status(const RunReport& r);

/// Entry point of the `ews` executable.
int main_entry(int argc, char** argv);

}  // namespace ews::cli
