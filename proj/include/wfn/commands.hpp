#pragma once

#include "wfn/config.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wfn {

enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_config = 2, exit_stability = 3, exit_divergence = 4 };

struct CommandOptions {
    // wfn | bounds | taylor | approx | policy | simulate | verify
    std::string command;
    std::string config_path;
    std::string format = "csv";
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
    std::optional<int> threads;
    std::optional<GridConfig> grid;
    // verify only: run a single criterion.
    std::optional<int> only;
};

struct CommandResult {
    int exit_code = exit_ok;
    std::string output;
    std::string diagnostics;
};

// Loads the config, runs the command and maps library errors to exit codes.
CommandResult run_command(const CommandOptions& opt);
// Same, with an already parsed config.
CommandResult run_command(const CommandOptions& opt, const RunConfig& cfg);

} // namespace wfn
