#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vbounds::cli {

enum ExitCode : int {
    kSuccess = 0,
    kInputError = 1,
    kInfeasibleBudget = 2,
    kSolverFailure = 3,
};

// Environment variable holding the default grid resolution.
inline constexpr const char* kGridEnv = "VBOUNDS_GRID_M";

// Runs one command; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vbounds::cli
