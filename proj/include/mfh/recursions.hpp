#pragma once

#include "mfh/model.hpp"
#include "mfh/policy.hpp"
#include "mfh/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mfh {

struct SolverOptions {
  /// An operator is positive definite when its minimum eigenvalue exceeds this.
  double pd_tol = 1e-10;
  /// Reciprocal condition number below which a stacked gain system is singular.
  double cond_tol = 1e-13;
  /// Weight w of the extra w*I state term in the H2 value recursion. The
  /// resulting H2 criterion is sum E[|z|^2 + w |x|^2]; w = 1 is the
  /// published recursion, w = 0 the plain output energy.
  double h2_state_weight = 1.0;
};

/// The six operators of the bounded-real recursion at one step, evaluated
/// at the continuation values P(k+1), Q(k+1).
struct SbrlOperators {
  Matrix L, G, H;     // deviation: n x n, n x l, l x l
  Matrix Lt, Gt, Ht;  // mean
};

SbrlOperators sbrl_operators(const StageParams& stage, const Matrix& P_next, const Matrix& Q_next,
                             double gamma);

/// Solution of the constrained bounded-real recursion for the uncontrolled
/// system (control channel ignored).
struct SbrlSolution {
  double gamma = 0.0;
  MatrixSeq P, Q;     // k = 0..K+1
  MatrixSeq H, Ht;    // k = 0..K, evaluated at k+1
  MatrixSeq V, Vbb;   // worst-case deviation / mean gains, k = 0..K

  LinearPolicy worst_case_disturbance() const;
};

Outcome<SbrlSolution> sbrl_solve(const MeanFieldSystem& system, double gamma,
                                 const SolverOptions& options = {});

struct LqSolution {
  MatrixSeq Pt, Qt;  // k = 0..K+1
  MatrixSeq U, Ut;   // k = 0..K; mean gain is U + Ut
  MatrixSeq H1, Ht1; // k = 0..K, evaluated at k+1
  double optimal_value = 0.0;

  Matrix Ubb(int k) const { return U.at(static_cast<std::size_t>(k)) + Ut.at(static_cast<std::size_t>(k)); }
  LinearPolicy optimal_control() const;
};

Outcome<LqSolution> lq_solve(const LqSystem& system, const SolverOptions& options = {});

/// Deviation gains (U, V) and mean gains (Ubb, Vbb) of one coupled step.
struct CoupledGains {
  Matrix U, Ubb;  // q x n
  Matrix V, Vbb;  // l x n
};

/// Solves the two coupled gain pairs of one backward step as stacked
/// (q+l) x (q+l) linear systems. Throws SingularCouplingError when a
/// stacked system is numerically singular.
Outcome<CoupledGains> coupled_gain_step(const StageParams& stage, const Matrix& P1n, const Matrix& Q1n,
                                        const Matrix& Pt1n, const Matrix& Qt1n, double gamma,
                                        const SolverOptions& options = {}, int step = 0);

struct H2HinfSolution {
  double gamma = 0.0;
  double h2_state_weight = 1.0;
  MatrixSeq P1, Q1, Pt1, Qt1;  // k = 0..K+1
  MatrixSeq U, Ut, V, Vt;      // k = 0..K
  MatrixSeq H, Ht, H1, Ht1;    // k = 0..K, evaluated at k+1
  double h2_value = 0.0;       // x0' Qt1(0) x0
  double hinf_value = 0.0;     // x0' Q1(0) x0

  int horizon() const { return static_cast<int>(U.size()) - 1; }
  Matrix Ubb(int k) const { return U.at(static_cast<std::size_t>(k)) + Ut.at(static_cast<std::size_t>(k)); }
  Matrix Vbb(int k) const { return V.at(static_cast<std::size_t>(k)) + Vt.at(static_cast<std::size_t>(k)); }

  /// u*(k) = U x + Ut E x
  LinearPolicy control_policy() const;
  /// v*(k) = V x + Vt E x
  LinearPolicy disturbance_policy() const;

  /// Named sequence lookup: P1, Q1, Pt1, Qt1, U, Ut, V, Vt, H, Ht, H1, Ht1.
  const MatrixSeq& sequence(const std::string& name) const;
  static const std::vector<std::string>& sequence_names();
};

/// Runs the backward recursion for the four coupled equations from
/// k = K down to 0. Fails with the step and operator at which positivity is lost.
Outcome<H2HinfSolution> h2hinf_solve(const MeanFieldSystem& system, double gamma,
                                     const SolverOptions& options = {});

/// Per-equation maximum absolute residual of a solution substituted back
/// into its defining equations.
struct H2HinfResiduals {
  double P1 = 0, Q1 = 0, Pt1 = 0, Qt1 = 0;
  double U = 0, Ubb = 0, V = 0, Vbb = 0;
  double max() const;
};

H2HinfResiduals h2hinf_residuals(const MeanFieldSystem& system, const H2HinfSolution& solution);

struct GammaSearchOptions {
  SolverOptions solver;
  int scan_points = 50;
  int max_iterations = 200;
};

struct GammaSearchResult {
  /// Midpoint of the final bracket; within tol/2 of the feasibility threshold
  /// when feasibility is monotone in gamma.
  double gamma_star = 0.0;
  /// Smallest gamma actually certified (upper end of the final bracket).
  double certified_gamma = 0.0;
  H2HinfSolution certificate;
  int iterations = 0;
  bool non_monotone_detected = false;
  std::vector<double> scan_gammas;
  std::vector<bool> scan_feasible;
  std::vector<std::string> warnings;
};

/// Bisection for the smallest gamma in [lo, hi] at which h2hinf_solve
/// succeeds. Fails with the failure observed at `hi` when `hi` itself is
/// infeasible. Feasibility is assumed monotone in gamma and spot-checked on
/// a uniform scan of `scan_points` values.
Outcome<GammaSearchResult> gamma_star_search(const MeanFieldSystem& system, double lo, double hi,
                                             double tol, const GammaSearchOptions& options = {});

}  // namespace mfh
