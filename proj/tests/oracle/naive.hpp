#pragma once

// Straightforward re-implementations used as test oracles. They form explicit
// inverses and iterate where the library solves directly, so agreement with
// the library is evidence rather than tautology.

#include "mfh/moments.hpp"
#include "mfh/recursions.hpp"

namespace oracle {

using mfh::Matrix;
using mfh::MatrixSeq;
using mfh::Vector;
using mfh::VectorSeq;

struct Ops {
  Matrix L, G, H, Lt, Gt, Ht;
};

/// Bounded-real operators written out term by term.
Ops sbrl_ops(const mfh::StageParams& s, const Matrix& P, const Matrix& Q, double gamma);

struct FixedPoint {
  Matrix U, Ubb, V, Vbb;
  bool converged = false;
  int iterations = 0;
};

/// Alternates U <- f(V), V <- g(U) (and the mean analogue) until the update
/// falls below `tol`.
FixedPoint fixed_point_gains(const mfh::StageParams& s, const Matrix& P1n, const Matrix& Q1n, const Matrix& Pt1n,
                             const Matrix& Qt1n, double gamma, double tol = 1e-13, int max_iterations = 10000);

/// Largest per-entry residual of the four value equations and the four gain
/// equations, evaluated with explicit inverses.
double h2hinf_residual(const mfh::MeanFieldSystem& system, const mfh::H2HinfSolution& sol);

/// Residual of the bounded-real recursion.
double sbrl_residual(const mfh::MeanFieldSystem& system, const mfh::SbrlSolution& sol);

/// Residual of the LQ recursion.
double lq_residual(const mfh::LqSystem& system, const mfh::LqSolution& sol);

struct RawMoments {
  VectorSeq mean;     // E x(k)
  MatrixSeq second;   // E x(k) x(k)'
  double output = 0;  // sum E|z|^2
  double disturbance = 0;
};

/// Propagates the raw second moment E x x' of the closed loop written as
/// x+ = (Ma x + Mb Ex + c) + w (Na x + Nb Ex + d).
RawMoments raw_moments(const mfh::MeanFieldSystem& system, const mfh::Policies& policies, const Vector& x0);

}  // namespace oracle
