#pragma once
#include <filesystem>
#include <ostream>

#include "stablecond/condition.hpp"
#include "stablecond/config.hpp"

namespace stablecond {

enum ExitCode : int { exit_ok = 0, exit_error = 1, exit_check_failed = 2 };

TargetSet build_target_set(const RunConfig& cfg, const std::string& prefix);
RunControl build_control(const RunConfig& cfg);

// Runs the configured experiment and writes resolved-config.json, report.json,
// report.csv and plot-data.txt into out_dir (created if needed). Progress goes to log.
// Returns exit_ok or exit_check_failed; errors are thrown.
int run_experiment(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace stablecond
