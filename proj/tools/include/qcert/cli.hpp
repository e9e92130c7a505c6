#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

namespace qcert::cli {

enum ExitCode : int {
  kSuccess = 0,
  kError = 1,
  kInfeasible = 2,
  kSectorViolation = 3,
};

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// Entry point of the `qcert` tool. Normal output goes to `out`, diagnostics
/// to `err`; the return value is the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qcert::cli
