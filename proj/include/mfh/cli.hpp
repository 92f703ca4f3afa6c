#pragma once

#include "mfh/types.hpp"

#include <iosfwd>
#include <string>

namespace mfh::cli {

enum ExitCode : int {
  kOk = 0,
  kError = 1,
  kInfeasible = 2,
  kInvalidInput = 3,
  kVerificationFailed = 4,
};

/// Default output directory when --output is absent.
inline constexpr const char* kOutputDirEnv = "MFH2HINF_OUT_DIR";

/// Parses argv and runs one command, writing results to `out` (or a file)
/// and diagnostics to `err`. Returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// "[[a, b], [c, d]]" with fixed decimals.
std::string format_matrix(const Matrix& m, int decimals = 4);

}  // namespace mfh::cli
