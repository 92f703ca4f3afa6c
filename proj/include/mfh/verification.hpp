#pragma once

#include "mfh/moments.hpp"
#include "mfh/recursions.hpp"
#include "mfh/simulate.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mfh {

struct PropertyResult {
  std::string property;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct VerificationReport {
  std::vector<PropertyResult> results;
  bool ok() const;
};

struct VerifyOptions {
  std::uint64_t seed = kDefaultSeed;
  int perturbations = 200;
  int identity_trials = 50;
  int norm_policies = 1000;
  double residual_tol = 1e-10;
  double sign_tol = 1e-9;
  double saddle_tol = 1e-9;
  double identity_tol = 1e-10;
};

/// Checks a synthesized solution against the properties it must satisfy:
/// equation residuals, terminal forcing, sign structure, value formulas,
/// both saddle inequalities, the quadratic decomposition identity and the
/// sampled disturbance gain bound.
VerificationReport verify_solution(const MeanFieldSystem& system, const H2HinfSolution& solution,
                                   const VerifyOptions& options = {});

/// CSV with header "property,status,measured,threshold".
void write_verification_csv(std::ostream& out, const VerificationReport& report);

}  // namespace mfh
