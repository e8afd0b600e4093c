#pragma once

#include <iosfwd>

namespace pcurve::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kSpecError = 1;
inline constexpr int kInadmissible = 2;
inline constexpr int kValidationFailed = 3;

// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pcurve::cli
