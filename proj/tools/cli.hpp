#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fluctwork::cli {

enum ExitCode : int {
    kOk = 0,
    kInfeasible = 1,
    kInvalid = 2,
    kNumeric = 3,
};

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fluctwork::cli
