#pragma once

#include <iosfwd>
#include <string>

namespace divopt {

// exit codes
constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitNoBracket = 2;
constexpr int kExitConfig = 3;
constexpr int kExitNumeric = 4;

// 12 significant digits, "inf"/"-inf", empty for NaN
std::string fmt_num(double v);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace divopt
