#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sidekick::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // infeasible plan, failed validation, bad input
inline constexpr int kExitUsage = 2;    // bad or conflicting flags

/// Runs one CLI invocation; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sidekick::cli
