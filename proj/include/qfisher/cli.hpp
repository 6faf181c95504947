#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qfisher::cli {

enum ExitCode : int { ok = 0, verdict_failure = 1, usage_error = 2, numerical_error = 3 };

/// Runs one command line (without the program name). Reports go to `out`
/// unless --output names a file; diagnostics go to `err`. `--config FILE`
/// reads flat `key = value` lines that act as defaults for the matching
/// `--key` flags; flags given on the command line win.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qfisher::cli
