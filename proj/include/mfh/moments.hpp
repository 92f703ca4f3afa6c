#pragma once

#include "mfh/model.hpp"
#include "mfh/policy.hpp"
#include "mfh/recursions.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace mfh {

/// Feedback laws closing the control and disturbance channels. An absent
/// policy means the channel is identically zero.
struct Policies {
  std::optional<LinearPolicy> control;
  std::optional<LinearPolicy> disturbance;
};

/// Exact first and second moments of the closed-loop state.
struct MomentTrajectory {
  VectorSeq mean;  // E x(k), k = 0..K+1
  MatrixSeq cov;   // E[(x - Ex)(x - Ex)'], k = 0..K+1
  std::vector<double> output_energy;       // E|z(k)|^2 = E|Phi x|^2 + E|Psi u|^2, k = 0..K
  std::vector<double> disturbance_energy;  // E|v(k)|^2
  std::vector<double> control_energy;      // E|u(k)|^2
  std::vector<double> state_energy;        // E|x(k)|^2
};

/// Propagates
///   m(k+1) = (Abb + Bbb Vbb + F1 Ubb) m + Bbb h_v + F1 h_u
///   Y(k+1) = M1 Y M1' + M2 Y M2' + s s'
/// with M1 = A + B V + F1 U, M2 = C + D V, s = Cbb m + Dbb E v.
MomentTrajectory propagate_moments(const MeanFieldSystem& system, const Policies& policies, const Vector& x0);

struct StepCost {
  int k = 0;
  double disturbance_energy = 0.0;  // E|v(k)|^2
  double output_energy = 0.0;       // E|z(k)|^2
  double state_energy = 0.0;        // E|x(k)|^2
};

struct CostBreakdown {
  double jk = 0.0;            // sum gamma^2 E|v|^2 - E|z|^2
  double j2 = 0.0;            // sum E|z|^2
  double state_energy = 0.0;  // sum E|x|^2
  std::vector<StepCost> per_step;

  /// H2 criterion optimized by the coupled recursion: j2 + w * state_energy.
  double h2_criterion(double h2_state_weight) const { return j2 + h2_state_weight * state_energy; }
};

CostBreakdown evaluate_costs(const MeanFieldSystem& system, const Policies& policies, const Vector& x0,
                             double gamma);

/// Both sides of the quadratic decomposition identity for cost jk, for
/// arbitrary symmetric sequences P, Q of length K+2:
///
///   jk = sum E[xi' Mt(P) xi] + sum eta' St(P,Q) eta
///        - E[dx(K+1)' P(K+1) dx(K+1)] + x0' Q(0) x0 - m(K+1)' Q(K+1) m(K+1)
///
/// with xi = (x - Ex, v - Ev) and eta = (Ex, Ev). A control policy is folded
/// into the closed loop; it must not carry open-loop offsets.
struct IdentitySides {
  double lhs = 0.0;
  double rhs = 0.0;
};

IdentitySides lemma_decomposition_check(const MeanFieldSystem& system, const MatrixSeq& P, const MatrixSeq& Q,
                                        const Policies& policies, const Vector& x0, double gamma);

struct NormBoundOptions {
  int n_policies = 1000;
  std::uint64_t seed = 20170911;
  /// Closes the control channel (e.g. u*) before bounding.
  std::optional<LinearPolicy> control;
  /// Feedback disturbances always tried (each with every single-step excitation).
  std::vector<LinearPolicy> extra_candidates;
};

struct NormBound {
  double best_ratio = 0.0;
  LinearPolicy best_policy;
  int evaluated = 0;
  bool degenerate = false;  // every candidate had zero disturbance energy
};

/// Lower bound on the disturbance-to-output gain with x0 = 0, maximizing the
/// exact ratio sqrt(sum E|z|^2 / sum E|v|^2) over mean-field feedback
/// disturbances with a single deterministic excitation step.
NormBound norm_lower_bound(const MeanFieldSystem& system, const NormBoundOptions& options);

/// Same bound for the closed loop under the synthesized u*; the synthesized
/// worst case v* is included among the candidates.
Outcome<NormBound> norm_lower_bound(const MeanFieldSystem& system, double gamma, int n_policies,
                                    std::uint64_t seed, const SolverOptions& solver = {});

}  // namespace mfh
