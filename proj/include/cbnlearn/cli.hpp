#pragma once

#include <iosfwd>

namespace cbnlearn {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point of the `cbnlearn` tool; subcommands gen-data, discover, fit,
/// infer and compare. Results go to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace cbnlearn
