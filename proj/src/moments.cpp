#include "mfh/moments.hpp"

#include "mfh/linalg.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace mfh {

namespace {

std::size_t at(int k) { return static_cast<std::size_t>(k); }

void check_policies(const MeanFieldSystem& system, const Policies& policies) {
  const auto& d = system.dims;
  if (policies.control) policies.control->check(d.q, d.n, d.horizon);
  if (policies.disturbance) policies.disturbance->check(d.l, d.n, d.horizon);
}

/// Per-step gains of one channel, zero when the channel is open.
struct ChannelStep {
  Matrix gain;       // acts on x - Ex
  Matrix total;      // acts on Ex
  Vector offset;
};

ChannelStep channel_step(const std::optional<LinearPolicy>& policy, int k, int width, int n) {
  if (!policy) return {Matrix::Zero(width, n), Matrix::Zero(width, n), Vector::Zero(width)};
  return {policy->gains[at(k)], policy->total_gain(k), policy->offset(k)};
}

}  // namespace

MomentTrajectory propagate_moments(const MeanFieldSystem& system, const Policies& policies, const Vector& x0) {
  require_valid(system);
  check_policies(system, policies);
  const auto& d = system.dims;
  if (x0.size() != d.n) throw DimensionError("propagate_moments: x0 length mismatch");
  const int K = d.horizon;

  MomentTrajectory t;
  t.mean.reserve(at(K + 2));
  t.cov.reserve(at(K + 2));
  t.mean.push_back(x0);
  t.cov.push_back(Matrix::Zero(d.n, d.n));

  for (int k = 0; k <= K; ++k) {
    const auto& s = system.stage(k);
    const Vector& m = t.mean.back();
    const Matrix& Y = t.cov.back();
    const auto u = channel_step(policies.control, k, d.q, d.n);
    const auto v = channel_step(policies.disturbance, k, d.l, d.n);

    const Vector Eu = u.total * m + u.offset;
    const Vector Ev = v.total * m + v.offset;

    const double ex2 = Y.trace() + m.squaredNorm();
    const double ephi2 = (s.Phi * Y * s.Phi.transpose()).trace() + (s.Phi * m).squaredNorm();
    const double eu2 = (u.gain * Y * u.gain.transpose()).trace() + Eu.squaredNorm();
    const double ev2 = (v.gain * Y * v.gain.transpose()).trace() + Ev.squaredNorm();
    t.state_energy.push_back(ex2);
    t.output_energy.push_back(ephi2 + eu2);
    t.control_energy.push_back(eu2);
    t.disturbance_energy.push_back(ev2);

    const Matrix M1 = s.A + s.B * v.gain + s.F1 * u.gain;
    const Matrix M2 = s.C + s.D * v.gain;
    const Vector drive = s.Cbb() * m + s.Dbb() * Ev;
    Matrix Y_next = M1 * Y * M1.transpose() + M2 * Y * M2.transpose() + drive * drive.transpose();
    Vector m_next = s.Abb() * m + s.Bbb() * Ev + s.F1 * Eu;
    t.cov.push_back(linalg::symmetrize(Y_next));
    t.mean.push_back(std::move(m_next));
  }
  return t;
}

CostBreakdown evaluate_costs(const MeanFieldSystem& system, const Policies& policies, const Vector& x0,
                             double gamma) {
  const auto t = propagate_moments(system, policies, x0);
  CostBreakdown c;
  const double g2 = gamma * gamma;
  for (std::size_t k = 0; k < t.output_energy.size(); ++k) {
    StepCost step{static_cast<int>(k), t.disturbance_energy[k], t.output_energy[k], t.state_energy[k]};
    c.jk += g2 * step.disturbance_energy - step.output_energy;
    c.j2 += step.output_energy;
    c.state_energy += step.state_energy;
    c.per_step.push_back(step);
  }
  return c;
}

IdentitySides lemma_decomposition_check(const MeanFieldSystem& system, const MatrixSeq& P, const MatrixSeq& Q,
                                        const Policies& policies, const Vector& x0, double gamma) {
  const auto& d = system.dims;
  const int K = d.horizon;
  if (static_cast<int>(P.size()) != K + 2 || static_cast<int>(Q.size()) != K + 2) {
    throw DimensionError("lemma_decomposition_check: P and Q need K+2 entries");
  }
  if (policies.control && policies.control->has_offsets()) {
    throw std::invalid_argument("lemma_decomposition_check: control policy must be pure feedback");
  }
  const auto t = propagate_moments(system, policies, x0);

  IdentitySides sides;
  sides.lhs = evaluate_costs(system, policies, x0, gamma).jk;

  const Matrix g2 = gamma * gamma * Matrix::Identity(d.l, d.l);
  double rhs = 0.0;
  for (int k = 0; k <= K; ++k) {
    const auto& s = system.stage(k);
    const Matrix& Pn = P[at(k + 1)];
    const Matrix& Qn = Q[at(k + 1)];
    const auto u = channel_step(policies.control, k, d.q, d.n);
    const auto v = channel_step(policies.disturbance, k, d.l, d.n);

    // Control folded into the drift and into the output weight.
    const Matrix A = s.A + s.F1 * u.gain;
    const Matrix Abb = s.Abb() + s.F1 * u.total;
    const Matrix W = s.Phi.transpose() * s.Phi + u.gain.transpose() * u.gain;
    const Matrix Wt = s.Phi.transpose() * s.Phi + u.total.transpose() * u.total;
    const Matrix Bbb = s.Bbb();
    const Matrix Cbb = s.Cbb();
    const Matrix Dbb = s.Dbb();

    Matrix Mt(d.n + d.l, d.n + d.l);
    Mt << -P[at(k)] + A.transpose() * Pn * A + s.C.transpose() * Pn * s.C - W,
          A.transpose() * Pn * s.B + s.C.transpose() * Pn * s.D,
          s.B.transpose() * Pn * A + s.D.transpose() * Pn * s.C,
          g2 + s.B.transpose() * Pn * s.B + s.D.transpose() * Pn * s.D;
    Matrix St(d.n + d.l, d.n + d.l);
    St << -Q[at(k)] + Abb.transpose() * Qn * Abb + Cbb.transpose() * Pn * Cbb - Wt,
          Abb.transpose() * Qn * Bbb + Cbb.transpose() * Pn * Dbb,
          Bbb.transpose() * Qn * Abb + Dbb.transpose() * Pn * Cbb,
          g2 + Bbb.transpose() * Qn * Bbb + Dbb.transpose() * Pn * Dbb;

    // xi = T (x - Ex) with T = [I; V]
    Matrix T(d.n + d.l, d.n);
    T << Matrix::Identity(d.n, d.n), v.gain;
    const Vector& m = t.mean[at(k)];
    Vector eta(d.n + d.l);
    eta << m, v.total * m + v.offset;

    rhs += (T.transpose() * Mt * T * t.cov[at(k)]).trace();
    rhs += eta.dot(St * eta);
  }
  const Vector& m_end = t.mean[at(K + 1)];
  rhs -= (P[at(K + 1)] * t.cov[at(K + 1)]).trace();
  rhs += x0.dot(Q[0] * x0);
  rhs -= m_end.dot(Q[at(K + 1)] * m_end);
  sides.rhs = rhs;
  return sides;
}

namespace {

struct Quadratic {
  Matrix output;       // sum E|z|^2 = h' output h
  Matrix disturbance;  // sum E|v|^2 = h' disturbance h
};

/// Energies as quadratic forms of a single excitation h applied at step j,
/// recovered by polarization (x0 = 0 makes both exactly quadratic in h).
Quadratic excitation_forms(const MeanFieldSystem& system, const std::optional<LinearPolicy>& control,
                           LinearPolicy disturbance, int j) {
  const auto& d = system.dims;
  const Vector zero_x0 = Vector::Zero(d.n);
  disturbance.offsets.assign(at(d.horizon + 1), Vector::Zero(d.l));
  auto energies = [&](const Vector& h) {
    disturbance.offsets[at(j)] = h;
    const auto c = evaluate_costs(system, Policies{control, disturbance}, zero_x0, 1.0);
    double ev = 0.0;
    for (const auto& s : c.per_step) ev += s.disturbance_energy;
    return std::pair{c.j2, ev};
  };

  Quadratic f{Matrix::Zero(d.l, d.l), Matrix::Zero(d.l, d.l)};
  std::vector<std::pair<double, double>> diag(at(d.l));
  for (int i = 0; i < d.l; ++i) {
    diag[at(i)] = energies(Vector::Unit(d.l, i));
    f.output(i, i) = diag[at(i)].first;
    f.disturbance(i, i) = diag[at(i)].second;
  }
  for (int i = 0; i < d.l; ++i) {
    for (int r = i + 1; r < d.l; ++r) {
      const auto e = energies(Vector::Unit(d.l, i) + Vector::Unit(d.l, r));
      f.output(i, r) = f.output(r, i) = 0.5 * (e.first - diag[at(i)].first - diag[at(r)].first);
      f.disturbance(i, r) = f.disturbance(r, i) = 0.5 * (e.second - diag[at(i)].second - diag[at(r)].second);
    }
  }
  return f;
}

}  // namespace

NormBound norm_lower_bound(const MeanFieldSystem& system, const NormBoundOptions& options) {
  if (options.n_policies < 1) throw std::invalid_argument("norm_lower_bound: n_policies must be >= 1");
  require_valid(system);
  const auto& d = system.dims;
  const int K = d.horizon;
  if (options.control) options.control->check(d.q, d.n, K);

  NormBound best;
  best.degenerate = true;
  best.best_policy = LinearPolicy::zero(Channel::kDisturbance, d.l, d.n, K);

  auto consider = [&](const LinearPolicy& feedback, int j) {
    ++best.evaluated;
    const auto f = excitation_forms(system, options.control, feedback, j);
    if (!(linalg::min_eigenvalue(f.disturbance) > 0)) return;
    best.degenerate = false;
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(linalg::symmetrize(f.output),
                                                         linalg::symmetrize(f.disturbance));
    const Eigen::Index top = d.l - 1;
    const double ratio2 = std::max(0.0, ges.eigenvalues()(top));
    const double ratio = std::sqrt(ratio2);
    if (ratio > best.best_ratio || best.evaluated == 1) {
      best.best_ratio = ratio;
      best.best_policy = feedback;
      best.best_policy.offsets.assign(at(K + 1), Vector::Zero(d.l));
      best.best_policy.offsets[at(j)] = ges.eigenvectors().col(top).normalized();
    }
  };

  std::vector<LinearPolicy> fixed = options.extra_candidates;
  fixed.push_back(LinearPolicy::zero(Channel::kDisturbance, d.l, d.n, K));
  for (const auto& feedback : fixed) {
    feedback.check(d.l, d.n, K);
    for (int j = 0; j <= K; ++j) consider(feedback, j);
  }

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> log_scale(-2.0, 0.5);
  std::uniform_int_distribution<int> start(0, K);
  for (int i = 0; i < options.n_policies; ++i) {
    const double scale = std::pow(10.0, log_scale(rng));
    LinearPolicy p = LinearPolicy::zero(Channel::kDisturbance, d.l, d.n, K);
    for (int k = 0; k <= K; ++k) {
      p.gains[at(k)] = p.gains[at(k)].unaryExpr([&](double) { return scale * normal(rng); });
      p.mean_gains[at(k)] = p.mean_gains[at(k)].unaryExpr([&](double) { return scale * normal(rng); });
    }
    consider(p, start(rng));
  }
  return best;
}

Outcome<NormBound> norm_lower_bound(const MeanFieldSystem& system, double gamma, int n_policies,
                                    std::uint64_t seed, const SolverOptions& solver) {
  auto sol = h2hinf_solve(system, gamma, solver);
  if (!sol) return sol.failure();
  NormBoundOptions options;
  options.n_policies = n_policies;
  options.seed = seed;
  options.control = sol->control_policy();
  options.extra_candidates.push_back(sol->disturbance_policy());
  return norm_lower_bound(system, options);
}

}  // namespace mfh
