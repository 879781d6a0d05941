#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace optinit {

struct OracleResult {
  std::string name;
  bool passed = false;
  /// Worst observed error (or mismatch count) and the bound it is held to.
  double worst = 0.0;
  double bound = 0.0;
  std::string detail;
};

/// Identity suite behind `optinit oracle-check`:
///  - shifted-reward policy evaluation equals q / |r1st| - 1,
///  - termination reward equals zero padding to T,
///  - greedy policy invariance under positive affine maps,
///  - constant norm of stacked features,
///  - iterative policy evaluation against a direct linear solve,
///  - OpenMP sweeps against the serial reference.
std::vector<OracleResult> run_oracle_checks(std::uint64_t seed = 7);

/// One line per check; returns true when all passed.
bool print_oracle_results(const std::vector<OracleResult>& results, std::ostream& out);

}  // namespace optinit
