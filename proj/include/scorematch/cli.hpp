#pragma once

#include <string>
#include <vector>

namespace scorematch::cli {

// Entry point for the command-line frontend; returns the process exit code
// (0 success, 1 runtime/IO failure, 2 usage or validation error).
int run(const std::vector<std::string>& args);

}  // namespace scorematch::cli
