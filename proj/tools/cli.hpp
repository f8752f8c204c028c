#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tactile::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;  // bad arguments or unreadable input
inline constexpr int kExitDidNotFinish = 2;
inline constexpr int kExitMalformedPgm = 3;
inline constexpr int kExitFrameTooSmall = 4;

// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tactile::cli
