#pragma once

#include <iosfwd>

namespace qpn::cli {

enum ExitCode : int {
  kOk = 0,
  kVerificationFailed = 1,
  kUsageError = 2,
  kRuntimeError = 3,
};

/// Runs one `qpn` invocation; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qpn::cli
