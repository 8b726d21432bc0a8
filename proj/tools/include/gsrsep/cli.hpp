#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gsrsep::cli {

/// Exit codes of the `gsrsep` command.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kNumericalError = 3,
};

/// Runs the command line `args` (without the program name). Results go to
/// `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gsrsep::cli
