#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mmls::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kUsage = 2, kNumerical = 3 };

/// Runs the tool on `args` (without the program name), writing messages to
/// `out` and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mmls::cli
