#pragma once

#include <iosfwd>

#include "nlsys/cli/config.hpp"

namespace nlsys::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_numerical = 2 };

/// Each command writes the resolved config and a schema stamp into
/// cfg.out_dir next to its outputs, and a short summary to `log`.
int cmd_solve(const RunConfig& cfg, std::ostream& log);
int cmd_scan(const RunConfig& cfg, std::ostream& log);
int cmd_rearrange(const RunConfig& cfg, std::ostream& log);
int cmd_evolve(const RunConfig& cfg, std::ostream& log);
int cmd_stability(const RunConfig& cfg, std::ostream& log);
int cmd_splitcheck(const RunConfig& cfg, std::ostream& log);
int cmd_gncert(const RunConfig& cfg, std::ostream& log);

/// Maps an error to exit_usage (bad input) or exit_numerical.
int exit_code_for(const Error& e);

}  // namespace nlsys::cli
