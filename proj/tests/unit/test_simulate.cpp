#include "mfh/moments.hpp"
#include "mfh/reference_example.hpp"
#include "mfh/simulate.hpp"

#include "generators.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace mfh {
namespace {

double maxabs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

void expect_identical(const McEstimate& a, const McEstimate& b) {
  ASSERT_EQ(a.mean_hat.size(), b.mean_hat.size());
  for (std::size_t k = 0; k < a.mean_hat.size(); ++k) {
    EXPECT_EQ(a.mean_hat[k], b.mean_hat[k]);
    EXPECT_EQ(a.mean_se[k], b.mean_se[k]);
    EXPECT_EQ(a.cov_hat[k], b.cov_hat[k]);
    EXPECT_EQ(a.cov_se[k], b.cov_se[k]);
  }
  EXPECT_EQ(a.jk.mean, b.jk.mean);
  EXPECT_EQ(a.jk.se, b.jk.se);
  EXPECT_EQ(a.j2.mean, b.j2.mean);
  EXPECT_EQ(a.h2_criterion.mean, b.h2_criterion.mean);
}

/// Fraction of mean components within `z` standard errors of the exact mean,
/// up to summation rounding on deterministic components.
double mean_coverage(const McEstimate& est, const MomentTrajectory& exact, double z) {
  int inside = 0, total = 0;
  for (std::size_t k = 0; k < est.mean_hat.size(); ++k) {
    for (Eigen::Index i = 0; i < est.mean_hat[k].size(); ++i) {
      ++total;
      const double rounding = 1e-12 * (1 + std::abs(exact.mean[k](i)));
      if (std::abs(est.mean_hat[k](i) - exact.mean[k](i)) <= z * est.mean_se[k](i) + rounding) ++inside;
    }
  }
  return static_cast<double>(inside) / total;
}

TEST(NoiseStream, MomentsOfBothKinds) {
  for (auto kind : {NoiseKind::kGaussian, NoiseKind::kRademacher}) {
    NoiseStream s({kind, 3}, 0);
    double sum = 0, sum2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double w = s.next();
      sum += w;
      sum2 += w * w;
      if (kind == NoiseKind::kRademacher) {
        ASSERT_EQ(std::abs(w), 1.0);
      }
    }
    EXPECT_NEAR(sum / n, 0.0, 0.01);
    EXPECT_NEAR(sum2 / n, 1.0, 0.02);
  }
}

TEST(NoiseStream, SubstreamsDifferAndRepeat) {
  const NoiseModel noise{NoiseKind::kGaussian, 5};
  NoiseStream a(noise, 1), b(noise, 1), c(noise, 2);
  const double x = a.next();
  EXPECT_EQ(x, b.next());
  EXPECT_NE(x, c.next());
}

TEST(SimulatePaths, ZeroSystemGivesZeroPaths) {
  const Dimensions d{2, 2, 2, 2, 3};
  const auto sys = MeanFieldSystem::constant(d, StageParams::zeros(d), Vector::Zero(2));
  SimulationOptions opts;
  opts.n_paths = 100;
  for (auto kind : {NoiseKind::kGaussian, NoiseKind::kRademacher}) {
    opts.noise.kind = kind;
    const auto est = simulate_paths(sys, {}, sys.x0, opts);
    for (std::size_t k = 0; k < est.mean_hat.size(); ++k) {
      EXPECT_EQ(est.mean_hat[k].cwiseAbs().maxCoeff(), 0.0);
      EXPECT_EQ(maxabs(est.cov_hat[k]), 0.0);
    }
    EXPECT_EQ(est.j2.mean, 0.0);
  }
}

TEST(SimulatePaths, BitIdenticalAcrossRunsAndThreadCounts) {
  const auto sys = reference::system();
  const auto sol = *h2hinf_solve(sys, 0.8);
  const Policies pol{sol.control_policy(), sol.disturbance_policy()};
  SimulationOptions opts;
  opts.n_paths = 5000;
  opts.gamma = 0.8;
  opts.block_size = 256;
  const auto a = simulate_paths(sys, pol, sys.x0, opts);
  const auto b = simulate_paths(sys, pol, sys.x0, opts);
  opts.threads = 4;
  const auto c = simulate_paths(sys, pol, sys.x0, opts);
  expect_identical(a, b);
  expect_identical(a, c);
  EXPECT_EQ(a.seed, opts.noise.seed);
}

TEST(SimulatePaths, ConsistentWithExactMomentsOnRandomSystems) {
  oracle::Gen g(77);
  int good = 0;
  const int systems = 20;
  for (int trial = 0; trial < systems; ++trial) {
    const Dimensions d{2, 2, 2, 2, 4};
    const auto sys = oracle::random_system(g, d, 0.4);
    const Policies pol{oracle::random_policy(g, Channel::kControl, 2, 2, 4, 0.3, true),
                       oracle::random_policy(g, Channel::kDisturbance, 2, 2, 4, 0.3, true)};
    SimulationOptions opts;
    opts.n_paths = 4000;
    opts.noise.seed = g.bits();
    const auto est = simulate_paths(sys, pol, sys.x0, opts);
    const auto exact = propagate_moments(sys, pol, sys.x0);
    if (mean_coverage(est, exact, 4.0) == 1.0) ++good;
  }
  EXPECT_GE(good, 19);
}

TEST(SimulatePaths, RademacherAndGaussianAgree) {
  const auto sys = reference::system();
  const auto sol = *h2hinf_solve(sys, 0.8);
  const Policies pol{sol.control_policy(), sol.disturbance_policy()};
  const auto exact = propagate_moments(sys, pol, sys.x0);
  SimulationOptions opts;
  opts.n_paths = 20000;
  const auto gauss = simulate_paths(sys, pol, sys.x0, opts);
  opts.noise.kind = NoiseKind::kRademacher;
  const auto rad = simulate_paths(sys, pol, sys.x0, opts);
  for (std::size_t k = 1; k < exact.mean.size(); ++k) {
    for (Eigen::Index i = 0; i < 2; ++i) {
      const double se = std::hypot(gauss.mean_se[k](i), rad.mean_se[k](i));
      EXPECT_LE(std::abs(gauss.mean_hat[k](i) - rad.mean_hat[k](i)), 3 * se);
      EXPECT_LE(std::abs(rad.mean_hat[k](i) - exact.mean[k](i)), 3 * rad.mean_se[k](i));
      for (Eigen::Index j = 0; j < 2; ++j) {
        const double cse = std::hypot(gauss.cov_se[k](i, j), rad.cov_se[k](i, j));
        EXPECT_LE(std::abs(gauss.cov_hat[k](i, j) - rad.cov_hat[k](i, j)), 3 * cse);
        EXPECT_LE(std::abs(rad.cov_hat[k](i, j) - exact.cov[k](i, j)), 3 * rad.cov_se[k](i, j));
      }
    }
  }
}

TEST(SimulatePaths, RejectsSinglePath) {
  SimulationOptions opts;
  opts.n_paths = 1;
  const auto sys = reference::system();
  EXPECT_THROW(simulate_paths(sys, {}, sys.x0, opts), std::invalid_argument);
}

TEST(ParticleSystem, SingleUncoupledParticleIsOnePath) {
  oracle::Gen g(88);
  auto sys = oracle::random_system(g, {2, 2, 2, 2, 4}, 0.5);
  for (auto& s : sys.stages) {
    s.At.setZero();
    s.Ct.setZero();
  }
  const auto control = oracle::random_policy(g, Channel::kControl, 2, 2, 4, 0.4, false);
  VectorSeq dist;
  for (int k = 0; k <= 4; ++k) dist.push_back(g.vector(2, 1.0));
  const NoiseModel noise{NoiseKind::kGaussian, 12345};
  auto uncoupled = control;
  for (auto& m : uncoupled.mean_gains) m.setZero();

  const auto means = particle_means(sys, uncoupled, dist, sys.x0, 1, 3, noise);
  const Policies pol{uncoupled, LinearPolicy::open_loop(Channel::kDisturbance, dist, 2)};
  const auto exact = propagate_moments(sys, pol, sys.x0);
  NoiseStream stream(noise, particle_stream_key(1, 3, 0));
  const auto path = sample_path(sys, pol, exact, 1.0, stream);
  ASSERT_EQ(means.size(), path.x.size());
  for (std::size_t k = 0; k < means.size(); ++k) EXPECT_LE((means[k] - path.x[k]).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ParticleSystem, DeterministicDynamicsMatchExactMean) {
  oracle::Gen g(89);
  auto sys = oracle::random_system(g, {2, 2, 2, 2, 3}, 0.5);
  for (auto& s : sys.stages) {
    s.C.setZero();
    s.Ct.setZero();
    s.D.setZero();
    s.Dt.setZero();
  }
  VectorSeq dist(4, Vector::Ones(2));
  ParticleOptions opts;
  opts.counts = {1, 7, 50};
  opts.n_reps = 3;
  const auto control = oracle::random_policy(g, Channel::kControl, 2, 2, 3, 0.4, false);
  const auto report = simulate_particle_system(sys, control, dist, sys.x0, opts);
  for (const auto& level : report.levels)
    for (double dev : level.deviations) EXPECT_LE(dev, 1e-12);
}

TEST(ParticleSystem, DeviationShrinksWithParticleCount) {
  oracle::Gen g(90);
  for (int trial = 0; trial < 3; ++trial) {
    const auto sys = oracle::random_system(g, {2, 2, 2, 2, 3}, 0.5);
    ParticleOptions opts;
    opts.counts = {10, 1000};
    opts.n_reps = 30;
    opts.noise.seed = g.bits();
    const auto report = simulate_particle_system(sys, std::nullopt, {}, sys.x0, opts);
    EXPECT_LE(report.levels[1].median, report.levels[0].median);
  }
}

TEST(ParticleSystem, ReportIsThreadIndependent) {
  const auto sys = reference::system();
  ParticleOptions opts;
  opts.counts = {10, 40};
  opts.n_reps = 8;
  const auto a = simulate_particle_system(sys, std::nullopt, {}, sys.x0, opts);
  opts.threads = 3;
  const auto b = simulate_particle_system(sys, std::nullopt, {}, sys.x0, opts);
  for (std::size_t i = 0; i < a.levels.size(); ++i) EXPECT_EQ(a.levels[i].deviations, b.levels[i].deviations);
}

}  // namespace
}  // namespace mfh
