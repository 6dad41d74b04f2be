#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sflr {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNotConverged = 3,
};

/// Entry point of the `sflr` tool; args[0] is the program name. Subcommands:
/// fit, predict, tune, simulate, evaluate and replicate. Output files are written as requested; progress
/// and results go to `out`, diagnostics to `err`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sflr
