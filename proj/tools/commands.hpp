#pragma once

#include <filesystem>

#include "run_config.hpp"

namespace mobility::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitInvariantFailure = 2;
inline constexpr int kExitNonConvergence = 3;

struct CommandOptions {
    std::filesystem::path out_dir;
    bool inject_fault = false;  ///< validate only: corrupt the value table
};

int cmd_analytic(const RunConfig& config, const CommandOptions& options);
int cmd_solve(const RunConfig& config, const CommandOptions& options);
int cmd_simulate(const RunConfig& config, const CommandOptions& options);
int cmd_sweep(const RunConfig& config, const CommandOptions& options);
int cmd_validate(const RunConfig& config, const CommandOptions& options);

} // namespace mobility::cli
