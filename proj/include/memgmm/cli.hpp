#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace memgmm::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes: 0 success (warnings allowed), 2 input or validation error,
/// 3 computation failure.
enum ExitCode : int { kOk = 0, kInputError = 2, kComputeError = 3 };

/// Entry point shared by the executable and the tests. args[0] is the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "1-9", "3" or "1,2,5-7" into a sorted list of counts.
std::vector<int> parse_int_ranges(const std::string& text);

}  // namespace memgmm::cli
