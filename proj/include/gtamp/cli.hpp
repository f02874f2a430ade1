#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gtamp {

/// Process exit codes used by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNoPlan = 2;
inline constexpr int kExitViolations = 3;

/// Entry point of the `gtamp` tool. `args` excludes the program name.
/// Subcommands: plan, validate, bench, gen, predicates.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gtamp
