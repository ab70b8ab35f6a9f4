#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace polarimeter::cli {

enum ExitCode : int { ok = 0, validation_error = 2, numerical_error = 3 };

/// Runs one command line (without the program name). Results go to `out`
/// unless --out names a file; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace polarimeter::cli
