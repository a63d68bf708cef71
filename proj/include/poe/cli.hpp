#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace poe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitBackend = 3;
inline constexpr int kExitInvariant = 4;

// Entry point for the `poe` tool. args[0] is the program name.
// Subcommands: run, sweep, trace, render, validate.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace poe::cli
