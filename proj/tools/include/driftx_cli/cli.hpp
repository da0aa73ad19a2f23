#pragma once

#include <iosfwd>

namespace driftx::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Parses argv, runs one subcommand and maps failures to exit codes: 1 for
/// bad flags, config files or argument values, 2 for anything that fails
/// while running. Machine-readable output goes to `out` (or files), all
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace driftx::cli
