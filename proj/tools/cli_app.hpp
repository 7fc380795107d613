#pragma once

#include <string>
#include <vector>

namespace degraf::cli {

/// Runs the degraf_flow command line. Returns the process exit code:
/// 0 success, 2 usage or input error, 1 internal error.
int run(const std::vector<std::string>& args);

}  // namespace degraf::cli
