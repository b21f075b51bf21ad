#pragma once

#include <string>
#include <vector>

namespace multmean::cli {

/// Exit codes: 0 all assertions passed, 2 an assertion failed, 1 usage or domain error.
int run(int argc, char** argv);
/// `args` excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace multmean::cli
