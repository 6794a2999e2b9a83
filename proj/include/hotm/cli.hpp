#pragma once

#include <string>
#include <vector>

namespace hotm::cli {

/// Exit codes: 0 success, 2 usage error, 3 certificate violation,
/// 4 solver failure.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);  // args without the program name

}  // namespace hotm::cli
