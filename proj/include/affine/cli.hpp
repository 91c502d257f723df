#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace affine::cli {

/// Exit codes of run().
enum ExitCode : int { kOk = 0, kUsage = 1, kValidation = 2, kDomain = 3, kNumeric = 4 };

/// Runs one subcommand. `args` excludes the program name. Results go to `out`
/// (or the --out file), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace affine::cli
