#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace p4p::cli {

inline constexpr std::string_view kToolName = "p4p_tool";
inline constexpr std::string_view kToolVersion = "1.0.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 1,   // usage, schema or validation failure
  kExitSolver = 2,  // numerical failure (collinear, degenerate, depth sign, ...)
};

/// Runs one command line (without argv[0]). Results go to `out` unless
/// --output names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "start:stop:step" (inclusive) or "a,b,c". Throws
/// std::invalid_argument on malformed input.
std::vector<double> parse_snr_list(std::string_view spec);

/// "%.17g" rendering used for every CSV float; round-trips exactly.
std::string format_real(double v);

}  // namespace p4p::cli
