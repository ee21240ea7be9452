#pragma once

#include <string>
#include <vector>

namespace a2lc {

inline constexpr const char* kToolVersion = "a2lc 0.1.0";

/// Entry point behind the a2lc binary. `args` excludes the program name.
/// Exit codes: 0 success, 2 configuration/usage error, 1 runtime error.
int cli_main(const std::vector<std::string>& args);

}  // namespace a2lc
