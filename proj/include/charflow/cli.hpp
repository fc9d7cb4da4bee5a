#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace charflow::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitVerdictFailure = 2;

const std::vector<std::string>& command_names();

// Runs one invocation (arguments exclude the program name). The JSON report or error
// object is printed to `out`; report files go to --out when given.
int run(const std::vector<std::string>& args, std::ostream& out);

}  // namespace charflow::cli
