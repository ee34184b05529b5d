#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ttm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitGateViolation = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRepoError = 3;

// Entry point of the `ttm` tool; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ttm
