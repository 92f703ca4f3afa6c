#pragma once

#include "mfh/types.hpp"

#include <string>
#include <vector>

namespace mfh {

/// Problem sizes. Stages are indexed k = 0..horizon.
struct Dimensions {
  int n = 1;      // state
  int l = 1;      // disturbance
  int q = 1;      // control
  int m_phi = 1;  // rows of Phi
  int horizon = 0;

  int stage_count() const { return horizon + 1; }
  bool operator==(const Dimensions&) const = default;
};

/// Coefficients of one time step of
///
///   x(k+1) = A x + At Ex + B v + Bt Ev + [C x + Ct Ex + D v + Dt Ev] w + F1 u
///   z(k)   = [Phi x ; Psi u]
///
/// where Ex, Ev are expectations and w is scalar white noise.
struct StageParams {
  Matrix A, At, C, Ct;  // n x n
  Matrix B, Bt, D, Dt;  // n x l
  Matrix F1;            // n x q
  Matrix Phi;           // m_phi x n
  Matrix Psi;           // q x q, Psi' Psi = I

  Matrix Abb() const { return A + At; }
  Matrix Bbb() const { return B + Bt; }
  Matrix Cbb() const { return C + Ct; }
  Matrix Dbb() const { return D + Dt; }

  /// All-zero stage with Psi = I.
  static StageParams zeros(const Dimensions& dims);
};

/// Finite-horizon, time-varying mean-field system with deterministic x0.
struct MeanFieldSystem {
  Dimensions dims;
  std::vector<StageParams> stages;  // size horizon + 1
  Vector x0;

  const StageParams& stage(int k) const { return stages.at(static_cast<std::size_t>(k)); }
  int horizon() const { return dims.horizon; }

  /// Replicates one stage over k = 0..horizon.
  static MeanFieldSystem constant(const Dimensions& dims, const StageParams& stage, Vector x0);
};

/// Controlled mean-field system without disturbance:
///
///   x(k+1) = A1 x + At1 Ex + F1 u + [B1 x + Bt1 Ex] w,   z = [Phi1 x ; Psi1 u]
struct LqStage {
  Matrix A1, At1;  // n x n
  Matrix B1, Bt1;  // n x n, noise channel
  Matrix F1;       // n x q
  Matrix Phi1;     // m_phi x n
  Matrix Psi1;     // q x q

  Matrix Abb1() const { return A1 + At1; }
  Matrix Bbb1() const { return B1 + Bt1; }
};

struct LqSystem {
  Dimensions dims;  // l is unused
  std::vector<LqStage> stages;
  Vector x0_bar;

  const LqStage& stage(int k) const { return stages.at(static_cast<std::size_t>(k)); }
  int horizon() const { return dims.horizon; }

  /// Drops the disturbance channel of `system`: A1 = A, B1 = C (noise), Phi1 = Phi, ...
  static LqSystem from_mean_field(const MeanFieldSystem& system);

  /// Embeds this system as a MeanFieldSystem with a single, zero disturbance column.
  MeanFieldSystem to_mean_field() const;
};

struct ValidationOptions {
  double psi_tol = 1e-9;
};

struct Violation {
  int stage = -1;  // -1: not stage specific
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

ValidationReport validate(const MeanFieldSystem& system, const ValidationOptions& options = {});
ValidationReport validate(const LqSystem& system, const ValidationOptions& options = {});

/// Throws DimensionError with the first violation if `system` is invalid.
void require_valid(const MeanFieldSystem& system, const ValidationOptions& options = {});

}  // namespace mfh
