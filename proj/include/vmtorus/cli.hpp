#pragma once

#include <iosfwd>

namespace vmtorus {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitIo = 2,
  kExitEstimation = 3,
};

/// Entry point of the `vmtorus` tool: fit, simulate, mc, monitor and density-grid subcommands.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vmtorus
