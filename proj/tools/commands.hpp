#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qpc::cli {

enum ExitCode : int {
  kSuccess = 0,
  kPhysicsFailure = 1,
  kUsageError = 2,
};

/// Runs one qpc invocation. args excludes the program name. Results go to
/// --out when given, otherwise to out; diagnostics go to err.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qpc::cli
