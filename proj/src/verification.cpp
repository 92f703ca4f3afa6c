#include "mfh/verification.hpp"

#include "mfh/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>

namespace mfh {

namespace {

std::size_t at(int k) { return static_cast<std::size_t>(k); }

Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  return Matrix::NullaryExpr(rows, cols, [&] { return normal(rng); });
}

/// base + random gain and (optionally) offset perturbations.
LinearPolicy perturb(const LinearPolicy& base, std::mt19937_64& rng, double scale, bool offsets) {
  LinearPolicy p = base;
  const int width = p.width();
  const Eigen::Index n = p.gains.front().cols();
  for (std::size_t k = 0; k < p.gains.size(); ++k) {
    p.gains[k] += random_matrix(rng, width, static_cast<int>(n), scale);
    p.mean_gains[k] += random_matrix(rng, width, static_cast<int>(n), scale);
  }
  if (offsets) {
    p.offsets.assign(p.gains.size(), Vector::Zero(width));
    for (auto& h : p.offsets) h = random_matrix(rng, width, 1, scale);
  }
  return p;
}

MatrixSeq random_symmetric_seq(std::mt19937_64& rng, int n, int count) {
  MatrixSeq seq;
  for (int k = 0; k < count; ++k) seq.push_back(linalg::symmetrize(random_matrix(rng, n, n, 1.0)));
  return seq;
}

PropertyResult at_most(std::string name, double measured, double threshold, std::string detail = {}) {
  return {std::move(name), measured <= threshold, measured, threshold, std::move(detail)};
}

}  // namespace

bool VerificationReport::ok() const {
  return std::all_of(results.begin(), results.end(), [](const PropertyResult& r) { return r.pass; });
}

VerificationReport verify_solution(const MeanFieldSystem& system, const H2HinfSolution& sol,
                                   const VerifyOptions& options) {
  const auto& d = system.dims;
  const int K = d.horizon;
  const Vector& x0 = system.x0;
  VerificationReport report;
  auto& out = report.results;

  const auto res = h2hinf_residuals(system, sol);
  out.push_back(at_most("equation_residuals", res.max(), options.residual_tol));

  const Matrix PhiPhi = system.stage(K).Phi.transpose() * system.stage(K).Phi;
  const Matrix upper = PhiPhi + sol.h2_state_weight * Matrix::Identity(d.n, d.n);
  const double terminal = std::max({linalg::max_abs_diff(sol.P1[at(K)], -PhiPhi),
                                    linalg::max_abs_diff(sol.Q1[at(K)], -PhiPhi),
                                    linalg::max_abs_diff(sol.Pt1[at(K)], upper),
                                    linalg::max_abs_diff(sol.Qt1[at(K)], upper)});
  out.push_back(at_most("terminal_forcing", terminal, 1e-12));

  double q1_max = -std::numeric_limits<double>::infinity();
  double qt1_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= K + 1; ++k) {
    q1_max = std::max(q1_max, linalg::max_eigenvalue(sol.Q1[at(k)]));
    qt1_min = std::min(qt1_min, linalg::min_eigenvalue(sol.Qt1[at(k)]));
  }
  out.push_back(at_most("Q1_negative_semidefinite", q1_max, options.sign_tol, "max eigenvalue over k"));
  out.push_back(at_most("Qt1_positive_semidefinite", -qt1_min, options.sign_tol, "negated min eigenvalue over k"));

  const Policies star{sol.control_policy(), sol.disturbance_policy()};
  const auto costs = evaluate_costs(system, star, x0, sol.gamma);
  const double j1 = costs.jk;
  const double j2 = costs.h2_criterion(sol.h2_state_weight);
  const double j1_value = x0.dot(sol.Q1[0] * x0);
  const double j2_value = x0.dot(sol.Qt1[0] * x0);
  out.push_back(at_most("J1_equals_value", std::abs(j1 - j1_value), 1e-9 * (1 + std::abs(j1_value))));
  out.push_back(at_most("J2_equals_value", std::abs(j2 - j2_value), 1e-9 * (1 + std::abs(j2_value))));

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> log_scale(-3.0, 0.0);
  double gap1 = std::numeric_limits<double>::infinity();
  double gap2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < options.perturbations; ++i) {
    const bool offsets = i % 2 == 1;
    const auto v = perturb(*star.disturbance, rng, std::pow(10.0, log_scale(rng)), offsets);
    gap1 = std::min(gap1, evaluate_costs(system, {star.control, v}, x0, sol.gamma).jk - j1);
    const auto u = perturb(*star.control, rng, std::pow(10.0, log_scale(rng)), offsets);
    gap2 = std::min(gap2,
                    evaluate_costs(system, {u, star.disturbance}, x0, sol.gamma).h2_criterion(sol.h2_state_weight) - j2);
  }
  out.push_back(at_most("saddle_disturbance", -gap1, options.saddle_tol, "J1(u*,v*) - min J1(u*,v)"));
  out.push_back(at_most("saddle_control", -gap2, options.saddle_tol, "J2(u*,v*) - min J2(u,v*)"));

  double identity = 0.0;
  for (int i = 0; i < options.identity_trials; ++i) {
    const auto P = random_symmetric_seq(rng, d.n, K + 2);
    const auto Q = random_symmetric_seq(rng, d.n, K + 2);
    const auto u = perturb(LinearPolicy::zero(Channel::kControl, d.q, d.n, K), rng, 0.5, false);
    const auto v = perturb(LinearPolicy::zero(Channel::kDisturbance, d.l, d.n, K), rng, 0.5, true);
    const auto sides = lemma_decomposition_check(system, P, Q, {u, v}, x0, sol.gamma);
    identity = std::max(identity, std::abs(sides.lhs - sides.rhs) / (1 + std::abs(sides.lhs)));
  }
  out.push_back(at_most("decomposition_identity", identity, options.identity_tol, "relative"));

  NormBoundOptions nb;
  nb.n_policies = options.norm_policies;
  nb.seed = options.seed;
  nb.control = star.control;
  nb.extra_candidates.push_back(*star.disturbance);
  const auto bound = norm_lower_bound(system, nb);
  PropertyResult gain{"disturbance_gain_below_gamma", !bound.degenerate && bound.best_ratio < sol.gamma,
                      bound.best_ratio, sol.gamma, "sampled lower bound"};
  if (bound.degenerate) gain.detail = "degenerate: every candidate had zero disturbance energy";
  out.push_back(gain);
  return report;
}

void write_verification_csv(std::ostream& out, const VerificationReport& report) {
  out << "property,status,measured,threshold\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : report.results) {
    out << r.property << ',' << (r.pass ? "PASS" : "FAIL") << ',' << r.measured << ',' << r.threshold << '\n';
  }
}

}  // namespace mfh
