#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sigcmp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitDegenerate = 4;

/// Runs one command line (without the program name). Documents go to `out`,
/// diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sigcmp::cli
