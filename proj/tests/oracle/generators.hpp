#pragma once

// Hand-rolled random generators for property tests. Every generator is a
// deterministic function of the Gen state.

#include "mfh/model.hpp"
#include "mfh/policy.hpp"
#include "mfh/recursions.hpp"

#include <cstdint>
#include <random>

namespace oracle {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return normal_(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::uint64_t bits() { return rng_(); }

  mfh::Matrix matrix(Eigen::Index rows, Eigen::Index cols, double scale);
  mfh::Vector vector(Eigen::Index size, double scale) { return matrix(size, 1, scale); }
  mfh::Matrix symmetric(Eigen::Index n, double scale);
  /// Random orthogonal matrix (Q factor of a Gaussian matrix).
  mfh::Matrix orthogonal(Eigen::Index n);

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Gaussian stage matrices with entry scale `scale`, orthogonal Psi.
mfh::MeanFieldSystem random_system(Gen& g, const mfh::Dimensions& dims, double scale = 0.3);

/// Random system on which h2hinf_solve succeeds at `gamma`; shrinks the
/// scale until it does.
mfh::MeanFieldSystem random_feasible_system(Gen& g, const mfh::Dimensions& dims, double gamma, double scale = 0.4);

mfh::LqSystem random_lq_system(Gen& g, const mfh::Dimensions& dims, double scale = 0.4);

mfh::LinearPolicy random_policy(Gen& g, mfh::Channel channel, int width, int n, int horizon, double scale,
                                bool offsets);

/// `base` plus Gaussian perturbations of every gain (and offsets if requested).
mfh::LinearPolicy perturbed(Gen& g, const mfh::LinearPolicy& base, double scale, bool offsets);

mfh::MatrixSeq random_symmetric_seq(Gen& g, int n, int count, double scale);

}  // namespace oracle
