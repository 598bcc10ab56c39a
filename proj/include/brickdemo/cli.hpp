#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace brickdemo::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNegative = 2;  ///< infeasible, inoperable or no order

/// Runs the command line `brickdemo <args...>` (args exclude the program
/// name). Results go to `out` or the -o file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace brickdemo::cli
