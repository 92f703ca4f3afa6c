#include "mfh/recursions.hpp"

#include "mfh/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfh {

using linalg::spd_solve;
using linalg::symmetrize;

namespace {

std::size_t at(int k) { return static_cast<std::size_t>(k); }

std::optional<FeasibilityFailure> check_pd(const Matrix& m, Operator which, int step, double tol) {
  const double lambda = linalg::min_eigenvalue(m);
  if (!(lambda > tol)) return FeasibilityFailure{step, which, lambda};
  return std::nullopt;
}

/// G H^{-1} G' for symmetric positive definite H.
Matrix quadratic_correction(const Matrix& G, const Matrix& H) { return G * spd_solve(H, G.transpose()); }

/// Bounded-real operators for a (possibly closed-loop) system whose deviation
/// and mean parts carry separate output weights W and Wt.
SbrlOperators brl_operators(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D,
                            const Matrix& Abb, const Matrix& Bbb, const Matrix& Cbb, const Matrix& Dbb,
                            const Matrix& W, const Matrix& Wt, const Matrix& P, const Matrix& Q,
                            double gamma) {
  const Eigen::Index l = B.cols();
  const Matrix g2 = gamma * gamma * Matrix::Identity(l, l);
  SbrlOperators ops;
  ops.L = A.transpose() * P * A + C.transpose() * P * C - W;
  ops.G = A.transpose() * P * B + C.transpose() * P * D;
  ops.H = symmetrize(g2 + B.transpose() * P * B + D.transpose() * P * D);
  ops.Lt = Abb.transpose() * Q * Abb + Cbb.transpose() * P * Cbb - Wt;
  ops.Gt = Abb.transpose() * Q * Bbb + Cbb.transpose() * P * Dbb;
  ops.Ht = symmetrize(g2 + Bbb.transpose() * Q * Bbb + Dbb.transpose() * P * Dbb);
  return ops;
}

Matrix solve_stacked(const Matrix& lhs, const Matrix& rhs, double cond_tol, int step) {
  Eigen::PartialPivLU<Matrix> lu(lhs);
  const double rcond = lu.rcond();
  if (!(rcond > cond_tol)) throw SingularCouplingError(step, rcond);
  return lu.solve(rhs);
}

}  // namespace

SbrlOperators sbrl_operators(const StageParams& s, const Matrix& P_next, const Matrix& Q_next, double gamma) {
  const Matrix W = s.Phi.transpose() * s.Phi;
  return brl_operators(s.A, s.B, s.C, s.D, s.Abb(), s.Bbb(), s.Cbb(), s.Dbb(), W, W, P_next, Q_next, gamma);
}

LinearPolicy SbrlSolution::worst_case_disturbance() const {
  LinearPolicy p;
  p.channel = Channel::kDisturbance;
  for (std::size_t k = 0; k < V.size(); ++k) {
    p.gains.push_back(V[k]);
    p.mean_gains.push_back(Vbb[k] - V[k]);
  }
  return p;
}

Outcome<SbrlSolution> sbrl_solve(const MeanFieldSystem& system, double gamma, const SolverOptions& options) {
  if (!(gamma > 0)) throw std::invalid_argument("sbrl_solve: gamma must be positive");
  require_valid(system);
  const int K = system.horizon();
  const int n = system.dims.n;

  SbrlSolution sol;
  sol.gamma = gamma;
  sol.P.assign(at(K + 2), Matrix::Zero(n, n));
  sol.Q.assign(at(K + 2), Matrix::Zero(n, n));
  sol.H.resize(at(K + 1));
  sol.Ht.resize(at(K + 1));
  sol.V.resize(at(K + 1));
  sol.Vbb.resize(at(K + 1));

  for (int k = K; k >= 0; --k) {
    const auto ops = sbrl_operators(system.stage(k), sol.P[at(k + 1)], sol.Q[at(k + 1)], gamma);
    if (auto f = check_pd(ops.H, Operator::kH, k, options.pd_tol)) return *f;
    if (auto f = check_pd(ops.Ht, Operator::kHt, k, options.pd_tol)) return *f;

    sol.V[at(k)] = -spd_solve(ops.H, ops.G.transpose());
    sol.Vbb[at(k)] = -spd_solve(ops.Ht, ops.Gt.transpose());
    sol.P[at(k)] = symmetrize(ops.L - quadratic_correction(ops.G, ops.H));
    sol.Q[at(k)] = symmetrize(ops.Lt - quadratic_correction(ops.Gt, ops.Ht));
    sol.H[at(k)] = ops.H;
    sol.Ht[at(k)] = ops.Ht;
  }
  return sol;
}

LinearPolicy LqSolution::optimal_control() const {
  LinearPolicy p;
  p.channel = Channel::kControl;
  p.gains = U;
  p.mean_gains = Ut;
  return p;
}

Outcome<LqSolution> lq_solve(const LqSystem& system, const SolverOptions& options) {
  const auto report = validate(system);
  if (!report.ok()) throw DimensionError("invalid LQ system: " + report.summary());
  const int K = system.horizon();
  const int n = system.dims.n;
  const int q = system.dims.q;
  const Matrix Iq = Matrix::Identity(q, q);

  LqSolution sol;
  sol.Pt.assign(at(K + 2), Matrix::Zero(n, n));
  sol.Qt.assign(at(K + 2), Matrix::Zero(n, n));
  sol.U.resize(at(K + 1));
  sol.Ut.resize(at(K + 1));
  sol.H1.resize(at(K + 1));
  sol.Ht1.resize(at(K + 1));

  for (int k = K; k >= 0; --k) {
    const auto& s = system.stage(k);
    const Matrix& P = sol.Pt[at(k + 1)];
    const Matrix& Q = sol.Qt[at(k + 1)];
    const Matrix Abb = s.Abb1();
    const Matrix Bbb = s.Bbb1();
    const Matrix W = s.Phi1.transpose() * s.Phi1;

    const Matrix H1 = symmetrize(Iq + s.F1.transpose() * P * s.F1);
    const Matrix Ht1 = symmetrize(Iq + s.F1.transpose() * Q * s.F1);
    if (auto f = check_pd(H1, Operator::kH1, k, options.pd_tol)) return *f;
    if (auto f = check_pd(Ht1, Operator::kHt1, k, options.pd_tol)) return *f;

    const Matrix G1 = s.A1.transpose() * P * s.F1;
    const Matrix L1 = s.A1.transpose() * P * s.A1 + s.B1.transpose() * P * s.B1 + W;
    const Matrix Gt1 = Abb.transpose() * Q * s.F1;
    const Matrix Lt1 = Abb.transpose() * Q * Abb + Bbb.transpose() * P * Bbb + W;

    const Matrix U = -spd_solve(H1, G1.transpose());
    const Matrix Ubb = -spd_solve(Ht1, Gt1.transpose());
    sol.U[at(k)] = U;
    sol.Ut[at(k)] = Ubb - U;
    sol.H1[at(k)] = H1;
    sol.Ht1[at(k)] = Ht1;
    sol.Pt[at(k)] = symmetrize(L1 - quadratic_correction(G1, H1));
    sol.Qt[at(k)] = symmetrize(Lt1 - quadratic_correction(Gt1, Ht1));
  }
  sol.optimal_value = system.x0_bar.dot(sol.Qt[0] * system.x0_bar);
  return sol;
}

namespace {

struct StepOperators {
  Matrix H, Ht, H1, Ht1;
};

StepOperators step_operators(const StageParams& s, const Matrix& P1n, const Matrix& Q1n, const Matrix& Pt1n,
                             const Matrix& Qt1n, double gamma) {
  const Eigen::Index l = s.B.cols();
  const Eigen::Index q = s.F1.cols();
  const Matrix Bbb = s.Bbb();
  const Matrix Dbb = s.Dbb();
  const Matrix g2 = gamma * gamma * Matrix::Identity(l, l);
  const Matrix Iq = Matrix::Identity(q, q);
  StepOperators ops;
  ops.H = symmetrize(g2 + s.B.transpose() * P1n * s.B + s.D.transpose() * P1n * s.D);
  ops.Ht = symmetrize(g2 + Bbb.transpose() * Q1n * Bbb + Dbb.transpose() * P1n * Dbb);
  ops.H1 = symmetrize(Iq + s.F1.transpose() * Pt1n * s.F1);
  ops.Ht1 = symmetrize(Iq + s.F1.transpose() * Qt1n * s.F1);
  return ops;
}

std::optional<FeasibilityFailure> check_step(const StepOperators& ops, int step, double tol) {
  if (auto f = check_pd(ops.H, Operator::kH, step, tol)) return f;
  if (auto f = check_pd(ops.Ht, Operator::kHt, step, tol)) return f;
  if (auto f = check_pd(ops.H1, Operator::kH1, step, tol)) return f;
  if (auto f = check_pd(ops.Ht1, Operator::kHt1, step, tol)) return f;
  return std::nullopt;
}

/// Gains from the two stacked systems
///
///   [ H1         F1'Pt B ] [U]     [ F1'Pt A         ]
///   [ B'P F1     H       ] [V] = - [ B'P A + D'P C   ]
///
/// and the same with (Abb, Bbb, Cbb, Dbb, Q, Qt) for the mean gains.
CoupledGains solve_gains(const StageParams& s, const StepOperators& ops, const Matrix& P1n, const Matrix& Q1n,
                         const Matrix& Pt1n, const Matrix& Qt1n, double cond_tol, int step) {
  const Eigen::Index n = s.A.rows();
  const Eigen::Index l = s.B.cols();
  const Eigen::Index q = s.F1.cols();
  const Matrix& F = s.F1;

  Matrix lhs(q + l, q + l);
  Matrix rhs(q + l, n);
  lhs << ops.H1, F.transpose() * Pt1n * s.B,
         s.B.transpose() * P1n * F, ops.H;
  rhs << -(F.transpose() * Pt1n * s.A),
         -(s.B.transpose() * P1n * s.A + s.D.transpose() * P1n * s.C);
  const Matrix dev = solve_stacked(lhs, rhs, cond_tol, step);

  const Matrix Abb = s.Abb();
  const Matrix Bbb = s.Bbb();
  const Matrix Cbb = s.Cbb();
  const Matrix Dbb = s.Dbb();
  lhs << ops.Ht1, F.transpose() * Qt1n * Bbb,
         Bbb.transpose() * Q1n * F, ops.Ht;
  rhs << -(F.transpose() * Qt1n * Abb),
         -(Bbb.transpose() * Q1n * Abb + Dbb.transpose() * P1n * Cbb);
  const Matrix mean = solve_stacked(lhs, rhs, cond_tol, step);

  CoupledGains g;
  g.U = dev.topRows(q);
  g.V = dev.bottomRows(l);
  g.Ubb = mean.topRows(q);
  g.Vbb = mean.bottomRows(l);
  return g;
}

}  // namespace

Outcome<CoupledGains> coupled_gain_step(const StageParams& stage, const Matrix& P1n, const Matrix& Q1n,
                                        const Matrix& Pt1n, const Matrix& Qt1n, double gamma,
                                        const SolverOptions& options, int step) {
  const auto ops = step_operators(stage, P1n, Q1n, Pt1n, Qt1n, gamma);
  if (auto f = check_step(ops, step, options.pd_tol)) return *f;
  return solve_gains(stage, ops, P1n, Q1n, Pt1n, Qt1n, options.cond_tol, step);
}

LinearPolicy H2HinfSolution::control_policy() const {
  LinearPolicy p;
  p.channel = Channel::kControl;
  p.gains = U;
  p.mean_gains = Ut;
  return p;
}

LinearPolicy H2HinfSolution::disturbance_policy() const {
  LinearPolicy p;
  p.channel = Channel::kDisturbance;
  p.gains = V;
  p.mean_gains = Vt;
  return p;
}

const std::vector<std::string>& H2HinfSolution::sequence_names() {
  static const std::vector<std::string> names = {"H", "Ht", "H1", "Ht1", "U", "Ut",
                                                 "V", "Vt", "P1", "Q1", "Pt1", "Qt1"};
  return names;
}

const MatrixSeq& H2HinfSolution::sequence(const std::string& name) const {
  if (name == "P1") return P1;
  if (name == "Q1") return Q1;
  if (name == "Pt1") return Pt1;
  if (name == "Qt1") return Qt1;
  if (name == "U") return U;
  if (name == "Ut") return Ut;
  if (name == "V") return V;
  if (name == "Vt") return Vt;
  if (name == "H") return H;
  if (name == "Ht") return Ht;
  if (name == "H1") return H1;
  if (name == "Ht1") return Ht1;
  throw std::out_of_range("unknown sequence: " + name);
}

namespace {

/// Right-hand sides of the four value equations at step k, given the gains.
struct ValueUpdate {
  Matrix P1, Q1, Pt1, Qt1;
};

ValueUpdate value_update(const StageParams& s, const StepOperators& ops, const CoupledGains& g,
                         const Matrix& P1n, const Matrix& Q1n, const Matrix& Pt1n, const Matrix& Qt1n,
                         double h2_state_weight) {
  const Eigen::Index n = s.A.rows();
  const Matrix& F = s.F1;
  const Matrix Abb = s.Abb();
  const Matrix Bbb = s.Bbb();
  const Matrix Cbb = s.Cbb();
  const Matrix Dbb = s.Dbb();
  const Matrix W = s.Phi.transpose() * s.Phi;
  const Matrix h2_weight = W + h2_state_weight * Matrix::Identity(n, n);

  ValueUpdate v;

  // Worst-case disturbance against the closed loop under u*.
  const Matrix Au = s.A + F * g.U;
  const Matrix Gu = Au.transpose() * P1n * s.B + s.C.transpose() * P1n * s.D;
  v.P1 = Au.transpose() * P1n * Au + s.C.transpose() * P1n * s.C - W - g.U.transpose() * g.U -
         quadratic_correction(Gu, ops.H);

  const Matrix Abbu = Abb + F * g.Ubb;
  const Matrix Gtu = Abbu.transpose() * Q1n * Bbb + Cbb.transpose() * P1n * Dbb;
  v.Q1 = Abbu.transpose() * Q1n * Abbu + Cbb.transpose() * P1n * Cbb - W - g.Ubb.transpose() * g.Ubb -
         quadratic_correction(Gtu, ops.Ht);

  // Optimal control against the closed loop under v*.
  const Matrix Av = s.A + s.B * g.V;
  const Matrix Cv = s.C + s.D * g.V;
  const Matrix Gv = Av.transpose() * Pt1n * F;
  v.Pt1 = Av.transpose() * Pt1n * Av + Cv.transpose() * Pt1n * Cv + h2_weight - quadratic_correction(Gv, ops.H1);

  const Matrix Abbv = Abb + Bbb * g.Vbb;
  const Matrix Cbbv = Cbb + Dbb * g.Vbb;
  const Matrix Gtv = Abbv.transpose() * Qt1n * F;
  v.Qt1 = Abbv.transpose() * Qt1n * Abbv + Cbbv.transpose() * Pt1n * Cbbv + h2_weight -
          quadratic_correction(Gtv, ops.Ht1);
  return v;
}

}  // namespace

Outcome<H2HinfSolution> h2hinf_solve(const MeanFieldSystem& system, double gamma, const SolverOptions& options) {
  if (!(gamma > 0)) throw std::invalid_argument("h2hinf_solve: gamma must be positive");
  require_valid(system);
  const int K = system.horizon();
  const int n = system.dims.n;

  H2HinfSolution sol;
  sol.gamma = gamma;
  sol.h2_state_weight = options.h2_state_weight;
  for (auto* seq : {&sol.P1, &sol.Q1, &sol.Pt1, &sol.Qt1}) seq->assign(at(K + 2), Matrix::Zero(n, n));
  for (auto* seq : {&sol.U, &sol.Ut, &sol.V, &sol.Vt, &sol.H, &sol.Ht, &sol.H1, &sol.Ht1}) seq->resize(at(K + 1));

  for (int k = K; k >= 0; --k) {
    const auto& s = system.stage(k);
    const Matrix& P1n = sol.P1[at(k + 1)];
    const Matrix& Q1n = sol.Q1[at(k + 1)];
    const Matrix& Pt1n = sol.Pt1[at(k + 1)];
    const Matrix& Qt1n = sol.Qt1[at(k + 1)];

    // i)-ii): positivity of the four operators at the continuation values.
    const auto ops = step_operators(s, P1n, Q1n, Pt1n, Qt1n, gamma);
    if (auto f = check_step(ops, k, options.pd_tol)) return *f;

    // iii): coupled gains.
    const auto gains = solve_gains(s, ops, P1n, Q1n, Pt1n, Qt1n, options.cond_tol, k);

    // iv): value matrices.
    const auto values = value_update(s, ops, gains, P1n, Q1n, Pt1n, Qt1n, options.h2_state_weight);

    sol.U[at(k)] = gains.U;
    sol.Ut[at(k)] = gains.Ubb - gains.U;
    sol.V[at(k)] = gains.V;
    sol.Vt[at(k)] = gains.Vbb - gains.V;
    sol.H[at(k)] = ops.H;
    sol.Ht[at(k)] = ops.Ht;
    sol.H1[at(k)] = ops.H1;
    sol.Ht1[at(k)] = ops.Ht1;
    sol.P1[at(k)] = symmetrize(values.P1);
    sol.Q1[at(k)] = symmetrize(values.Q1);
    sol.Pt1[at(k)] = symmetrize(values.Pt1);
    sol.Qt1[at(k)] = symmetrize(values.Qt1);
  }

  sol.h2_value = system.x0.dot(sol.Qt1[0] * system.x0);
  sol.hinf_value = system.x0.dot(sol.Q1[0] * system.x0);
  return sol;
}

double H2HinfResiduals::max() const { return std::max({P1, Q1, Pt1, Qt1, U, Ubb, V, Vbb}); }

H2HinfResiduals h2hinf_residuals(const MeanFieldSystem& system, const H2HinfSolution& sol) {
  const int K = system.horizon();
  H2HinfResiduals r;
  auto track = [](double& slot, const Matrix& a, const Matrix& b) {
    slot = std::max(slot, linalg::max_abs_diff(a, b));
  };
  for (int k = K; k >= 0; --k) {
    const auto& s = system.stage(k);
    const Matrix& P1n = sol.P1[at(k + 1)];
    const Matrix& Q1n = sol.Q1[at(k + 1)];
    const Matrix& Pt1n = sol.Pt1[at(k + 1)];
    const Matrix& Qt1n = sol.Qt1[at(k + 1)];
    const auto ops = step_operators(s, P1n, Q1n, Pt1n, Qt1n, sol.gamma);

    CoupledGains g{sol.U[at(k)], sol.Ubb(k), sol.V[at(k)], sol.Vbb(k)};
    const auto values = value_update(s, ops, g, P1n, Q1n, Pt1n, Qt1n, sol.h2_state_weight);
    track(r.P1, sol.P1[at(k)], values.P1);
    track(r.Q1, sol.Q1[at(k)], values.Q1);
    track(r.Pt1, sol.Pt1[at(k)], values.Pt1);
    track(r.Qt1, sol.Qt1[at(k)], values.Qt1);

    const Matrix& F = s.F1;
    const Matrix Au = s.A + F * g.U;
    const Matrix Gu = Au.transpose() * P1n * s.B + s.C.transpose() * P1n * s.D;
    track(r.V, g.V, -spd_solve(ops.H, Gu.transpose()));
    const Matrix Abbu = s.Abb() + F * g.Ubb;
    const Matrix Gtu = Abbu.transpose() * Q1n * s.Bbb() + s.Cbb().transpose() * P1n * s.Dbb();
    track(r.Vbb, g.Vbb, -spd_solve(ops.Ht, Gtu.transpose()));
    const Matrix Gv = (s.A + s.B * g.V).transpose() * Pt1n * F;
    track(r.U, g.U, -spd_solve(ops.H1, Gv.transpose()));
    const Matrix Gtv = (s.Abb() + s.Bbb() * g.Vbb).transpose() * Qt1n * F;
    track(r.Ubb, g.Ubb, -spd_solve(ops.Ht1, Gtv.transpose()));
  }
  return r;
}

Outcome<GammaSearchResult> gamma_star_search(const MeanFieldSystem& system, double lo, double hi, double tol,
                                             const GammaSearchOptions& options) {
  if (!(lo > 0) || !(hi > lo)) throw std::invalid_argument("gamma_star_search: need 0 < lo < hi");
  if (!(tol > 0)) throw std::invalid_argument("gamma_star_search: tol must be positive");

  GammaSearchResult result;
  auto attempt = [&](double g) -> Outcome<H2HinfSolution> {
    try {
      return h2hinf_solve(system, g, options.solver);
    } catch (const SingularCouplingError& e) {
      result.warnings.push_back(std::string("treated as infeasible: ") + e.what());
      return FeasibilityFailure{e.step(), Operator::kH, 0.0};
    }
  };

  auto at_hi = attempt(hi);
  if (!at_hi) return at_hi.failure();

  double infeasible = lo;
  double feasible = hi;
  auto at_lo = attempt(lo);
  const bool feasible_at_lo = at_lo.ok();
  if (feasible_at_lo) {
    feasible = lo;
    result.certificate = std::move(at_lo).value();
    result.gamma_star = lo;
  } else {
    result.certificate = std::move(at_hi).value();
    while (feasible - infeasible > tol && result.iterations < options.max_iterations) {
      const double mid = 0.5 * (infeasible + feasible);
      ++result.iterations;
      auto trial = attempt(mid);
      if (trial) {
        feasible = mid;
        result.certificate = std::move(trial).value();
      } else {
        infeasible = mid;
      }
    }
    result.gamma_star = 0.5 * (infeasible + feasible);
  }
  result.certified_gamma = feasible;

  // Monotonicity spot check: every scanned gamma above the certified value must
  // be feasible, every one below the infeasible bracket end must not be.
  const int m = std::max(options.scan_points, 2);
  for (int i = 0; i < m; ++i) {
    const double g = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1);
    const bool ok = attempt(g).ok();
    result.scan_gammas.push_back(g);
    result.scan_feasible.push_back(ok);
    const bool below = !feasible_at_lo && g <= infeasible;
    if ((g >= feasible && !ok) || (below && ok)) {
      result.non_monotone_detected = true;
      result.warnings.push_back("non-monotone feasibility at gamma=" + std::to_string(g) + " (" +
                                (ok ? "feasible" : "infeasible") + ")");
    }
  }
  return result;
}

}  // namespace mfh
