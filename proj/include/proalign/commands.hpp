#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "proalign/config.hpp"

namespace proalign {

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitVerifyFailed = 1, kExitUsage = 2, kExitNumerical = 3 };

/// Writes world.txt, dataset.txt and manifest.json into `out`.
void cmd_gen(const RunConfig& config, const std::string& out);

/// Trains on the world and dataset in config.data_dir and writes config.ini,
/// world.txt, dataset.txt, trajectory.csv, rewards.csv and diagnostics.json
/// into `out`, which must not exist yet (runs are atomic, never resumed).
/// Returns kExitNumerical when training diverged, kExitOk otherwise.
int cmd_train(const RunConfig& config, const std::string& out);

/// Runs the theorem suite, printing one report line per check to `log`.
/// With `out`, the same lines go to out/verify.txt.
int cmd_verify(const RunConfig& config, const std::optional<std::string>& only, bool inject_bug,
               const std::optional<std::string>& out, std::ostream& log);

/// Merges the trajectories of `runs` into out/merged.csv (keyed by loss kind,
/// seed, run, step) and writes out/summary.csv; prints the summary to `log`.
void cmd_report(const std::vector<std::string>& runs, const std::string& out, std::ostream& log);

}  // namespace proalign
