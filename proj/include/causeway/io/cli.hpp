#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace causeway::io {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitBudget = 3;

/// Runs the `causeway` command line. `args` excludes the program name.
/// Results go to files under --out (or `out` when no directory is given);
/// diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace causeway::io
