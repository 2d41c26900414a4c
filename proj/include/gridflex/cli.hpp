#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gridflex::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;     // solver or I/O failure
inline constexpr int kExitUsage = 2;       // bad flags, unreadable or invalid case
inline constexpr int kExitInfeasible = 3;  // a requested unrelaxed solve has no solution

/// Runs one command line (`args` excludes the program name). Human-readable
/// output goes to `out`, diagnostics and logs to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace gridflex::cli
