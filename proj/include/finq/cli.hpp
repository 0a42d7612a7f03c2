#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace finq {

/// Exit codes of the finq command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // typed runtime error
inline constexpr int kExitUsage = 2;
inline constexpr int kExitConfig = 3;

/// The whole command line program; `args` excludes the program name.
/// Standard streams are injected so tests can drive it in-process.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace finq
