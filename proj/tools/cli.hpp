#pragma once

#include <iosfwd>

namespace sepcov::cli {

/// Exit codes of the sepcov command.
enum ExitCode : int {
  kOk = 0,
  /// I/O, parse or usage error.
  kUsage = 1,
  /// The data do not support the requested statistic (degenerate sample,
  /// singular variance, ...).
  kStatistical = 2,
};

/// Entry point of the sepcov command. Results go to `out` unless an output
/// file is given; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sepcov::cli
