#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace plap {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_usage = 2 };

/// Runs the command line `args` (without the program name). Diagnostics go
/// to `err`, summaries to `out`, files under --out.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace plap
