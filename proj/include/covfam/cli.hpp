#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace covfam {

/// Process exit codes of the covfam tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitIo = 3,
  kExitCutLocus = 4,
  kExitNotConverged = 5,
};

/// Runs `covfam <args...>`; `args` excludes the program name. Data goes to
/// `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace covfam
