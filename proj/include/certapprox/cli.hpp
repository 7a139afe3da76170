#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace certapprox::cli {

/// Process exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kComputationError = 1,  // any other library error
  kToleranceViolated = 2,
  kVerificationFailed = 3,
  kUsageError = 4,
};

/// Runs one command ("approximate", "verify", "glue", "limit", "inspect").
/// `args` excludes the program name. Summaries go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace certapprox::cli
