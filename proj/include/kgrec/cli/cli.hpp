#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kgrec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Parses `args` (without the program name) and runs one subcommand.
/// Returns 0 on success, 1 on usage or configuration errors and 2 on data
/// errors. Help and diagnostics go to `out` and `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kgrec::cli
