#pragma once

#include <ostream>

namespace r0kit {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidateFailed = 1,
  kExitInvalidInput = 2,
  kExitDisagreement = 3,
  kExitSolverFailure = 4,
};

/// Entry point of the `r0kit` tool; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace r0kit
