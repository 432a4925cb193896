#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace paynet {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

/// Entry point of the `paynet` tool. `args` excludes the program name.
/// Subcommands: synth, features, run, dm, report.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace paynet
