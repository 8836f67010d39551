#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace xu::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kCheckFailed = 3 };

struct OracleCheck {
  std::string name;
  bool passed = false;
  double max_error = 0.0;
  double tolerance = 0.0;
};

/// Brute-force versus closed-form comparisons, weight and pmf identities and
/// the digamma identity. `perturb` offsets the closed-form side (negative test).
std::vector<OracleCheck> run_oracle_checks(std::uint64_t seed, double perturb = 0.0);

/// Entry point behind the xustat executable. Machine-readable key=value lines
/// go to `out`, diagnostics to `err`. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace xu::cli
