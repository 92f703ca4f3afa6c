#pragma once

#include "mfh/moments.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <vector>

namespace mfh {

inline constexpr std::uint64_t kDefaultSeed = 20170911;

enum class NoiseKind { kGaussian, kRademacher };

const char* to_string(NoiseKind kind);

/// Scalar white noise with E w = 0, E w^2 = 1, independent across steps.
struct NoiseModel {
  NoiseKind kind = NoiseKind::kGaussian;
  std::uint64_t seed = kDefaultSeed;
};

/// Independent substream keyed by (seed, key words). Streams with different
/// keys are statistically independent; equal keys give identical draws.
class NoiseStream {
 public:
  NoiseStream(const NoiseModel& noise, std::uint64_t path_index);
  NoiseStream(const NoiseModel& noise, const std::array<std::uint64_t, 4>& key);

  double next();

 private:
  NoiseKind kind_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::bernoulli_distribution coin_{0.5};
};

struct SimulationOptions {
  int n_paths = 100000;
  NoiseModel noise;
  double gamma = 1.0;            // weight of E|v|^2 in jk
  double h2_state_weight = 1.0;  // w in the H2 criterion j2 + w sum|x|^2
  int threads = 1;
  int block_size = 1024;
};

struct ScalarStat {
  double mean = 0.0;
  double se = 0.0;
};

struct McEstimate {
  int n_paths = 0;
  std::uint64_t seed = 0;
  NoiseKind noise = NoiseKind::kGaussian;
  VectorSeq mean_hat, mean_se;  // k = 0..K+1
  MatrixSeq cov_hat, cov_se;    // unbiased sample covariance and entrywise SE
  ScalarStat jk, j2, state_energy, h2_criterion;
};

/// One sampled trajectory x(0..K+1) together with its path costs.
struct SamplePath {
  VectorSeq x;
  double jk = 0.0;
  double j2 = 0.0;
  double state_energy = 0.0;
};

/// Draws one path of the mean-field dynamics. Ex and Ev come from the exact
/// moments in `exact`, which must be propagate_moments(system, policies, x0).
SamplePath sample_path(const MeanFieldSystem& system, const Policies& policies, const MomentTrajectory& exact,
                       double gamma, NoiseStream& noise);

/// Monte Carlo statistics over independent paths. Path i uses substream i, and
/// partial sums are reduced pairwise over fixed blocks, so the result is
/// bit-identical for every thread count.
McEstimate simulate_paths(const MeanFieldSystem& system, const Policies& policies, const Vector& x0,
                          const SimulationOptions& options);

struct ParticleOptions {
  std::vector<int> counts{10, 100, 1000};
  int n_reps = 50;
  NoiseModel noise;
  int threads = 1;
};

struct ParticleLevel {
  int particles = 0;
  std::vector<double> deviations;  // per repetition: max_k |mean_M(k) - m(k)|
  double median = 0.0;
  double mean = 0.0;
};

struct ParticleReport {
  std::vector<ParticleLevel> levels;
  bool median_decreasing = false;
};

/// Substream key of particle j in repetition `rep` of an M-particle run.
std::array<std::uint64_t, 4> particle_stream_key(int particles, int rep, int j);

/// Empirical means of one M-particle run, where At, Ct and the control's mean
/// gain act on the particle average. `disturbance` is an open-loop sequence
/// (empty for zero).
VectorSeq particle_means(const MeanFieldSystem& system, const std::optional<LinearPolicy>& control,
                         const VectorSeq& disturbance, const Vector& x0, int particles, int rep,
                         const NoiseModel& noise);

/// Deviation of the particle average from the exact mean for each count.
ParticleReport simulate_particle_system(const MeanFieldSystem& system, const std::optional<LinearPolicy>& control,
                                        const VectorSeq& disturbance, const Vector& x0,
                                        const ParticleOptions& options);

}  // namespace mfh
