#pragma once

#include <iosfwd>

namespace mmrrw {

// Exit codes of the command line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitUnknown = 3;
inline constexpr int kExitInternal = 4;

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace mmrrw
