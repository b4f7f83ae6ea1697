#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace emdp::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kNegative = 1;  // unsafe configuration, -inf value, unsafe simulation
inline constexpr int kInputError = 2;

// Runs the command line given without the program name. Reports go to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace emdp::cli
