#pragma once

#include <iosfwd>

namespace farboot {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerdictFailure = 1;
inline constexpr int kExitError = 2;

/// Entry point of the command-line tool. JSON goes to `out`, diagnostics to
/// `err`. Returns 0 on success, 1 when a validation verdict is not "pass",
/// and 2 on usage, config, input or numerical errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace farboot
