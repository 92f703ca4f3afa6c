#include "mfh/simulate.hpp"

#include "mfh/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

namespace mfh {

namespace {

std::size_t at(int k) { return static_cast<std::size_t>(k); }

std::mt19937_64 seeded_engine(std::uint64_t seed, const std::array<std::uint64_t, 4>& key) {
  std::vector<std::uint32_t> words;
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto w : key) push(w);
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

/// Calls fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  const int workers = std::clamp(threads, 1, std::max(1, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

Vector pairwise_sum(const std::vector<Vector>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return parts[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(parts, lo, mid) + pairwise_sum(parts, mid, hi);
}

struct ChannelValue {
  Vector value;
  Vector mean;
};

ChannelValue apply(const std::optional<LinearPolicy>& policy, int k, const Vector& x, const Vector& m, int width) {
  if (!policy) return {Vector::Zero(width), Vector::Zero(width)};
  const Vector offset = policy->offset(k);
  const Matrix& G = policy->gains[at(k)];
  const Matrix& Gt = policy->mean_gains[at(k)];
  return {G * x + Gt * m + offset, (G + Gt) * m + offset};
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

const char* to_string(NoiseKind kind) { return kind == NoiseKind::kGaussian ? "gaussian" : "rademacher"; }

NoiseStream::NoiseStream(const NoiseModel& noise, std::uint64_t path_index)
    : NoiseStream(noise, std::array<std::uint64_t, 4>{0, 0, 0, path_index}) {}

NoiseStream::NoiseStream(const NoiseModel& noise, const std::array<std::uint64_t, 4>& key)
    : kind_(noise.kind), engine_(seeded_engine(noise.seed, key)) {}

double NoiseStream::next() {
  if (kind_ == NoiseKind::kGaussian) return normal_(engine_);
  return coin_(engine_) ? 1.0 : -1.0;
}

SamplePath sample_path(const MeanFieldSystem& system, const Policies& policies, const MomentTrajectory& exact,
                       double gamma, NoiseStream& noise) {
  const auto& d = system.dims;
  const int K = d.horizon;
  SamplePath path;
  path.x.reserve(at(K + 2));
  path.x.push_back(exact.mean.front());
  const double g2 = gamma * gamma;
  for (int k = 0; k <= K; ++k) {
    const auto& s = system.stage(k);
    const Vector& x = path.x.back();
    const Vector& m = exact.mean[at(k)];
    const auto u = apply(policies.control, k, x, m, d.q);
    const auto v = apply(policies.disturbance, k, x, m, d.l);
    const double z2 = (s.Phi * x).squaredNorm() + (s.Psi * u.value).squaredNorm();
    path.j2 += z2;
    path.jk += g2 * v.value.squaredNorm() - z2;
    path.state_energy += x.squaredNorm();

    const double w = noise.next();
    Vector next = s.A * x + s.At * m + s.B * v.value + s.Bt * v.mean + s.F1 * u.value;
    next += w * (s.C * x + s.Ct * m + s.D * v.value + s.Dt * v.mean);
    path.x.push_back(std::move(next));
  }
  return path;
}

McEstimate simulate_paths(const MeanFieldSystem& system, const Policies& policies, const Vector& x0,
                          const SimulationOptions& options) {
  if (options.n_paths < 2) throw std::invalid_argument("simulate_paths: n_paths must be >= 2");
  if (options.block_size < 1) throw std::invalid_argument("simulate_paths: block_size must be >= 1");
  const auto exact = propagate_moments(system, policies, x0);
  const int n = system.dims.n;
  const int steps = system.horizon() + 2;
  const int N = options.n_paths;
  const int blocks = (N + options.block_size - 1) / options.block_size;
  const Eigen::Index state_len = static_cast<Eigen::Index>(steps) * n;
  const Eigen::Index record_len = state_len + 4;

  auto record = [&](int i) {
    NoiseStream stream(options.noise, static_cast<std::uint64_t>(i));
    const auto p = sample_path(system, policies, exact, options.gamma, stream);
    Vector r(record_len);
    for (int k = 0; k < steps; ++k) r.segment(static_cast<Eigen::Index>(k) * n, n) = p.x[at(k)];
    r(state_len) = p.jk;
    r(state_len + 1) = p.j2;
    r(state_len + 2) = p.state_energy;
    r(state_len + 3) = p.j2 + options.h2_state_weight * p.state_energy;
    return r;
  };
  auto block_range = [&](int b) {
    const int lo = b * options.block_size;
    return std::pair{lo, std::min(N, lo + options.block_size)};
  };

  // Pass 1: means.
  std::vector<Vector> parts(at(blocks));
  parallel_for(blocks, options.threads, [&](int b) {
    Vector acc = Vector::Zero(record_len);
    const auto [lo, hi] = block_range(b);
    for (int i = lo; i < hi; ++i) acc += record(i);
    parts[at(b)] = std::move(acc);
  });
  const Vector mean = pairwise_sum(parts, 0, parts.size()) / N;

  // Pass 2: centered products over the same substreams.
  const Eigen::Index nn = static_cast<Eigen::Index>(n) * n;
  const Eigen::Index second_len = 2 * steps * nn + 4;
  parallel_for(blocks, options.threads, [&](int b) {
    Vector acc = Vector::Zero(second_len);
    const auto [lo, hi] = block_range(b);
    for (int i = lo; i < hi; ++i) {
      const Vector c = record(i) - mean;
      for (int k = 0; k < steps; ++k) {
        const Vector ck = c.segment(static_cast<Eigen::Index>(k) * n, n);
        const Matrix outer = ck * ck.transpose();
        const Eigen::Map<const Vector> flat(outer.data(), nn);
        acc.segment(2 * k * nn, nn) += flat;
        acc.segment(2 * k * nn + nn, nn) += flat.cwiseAbs2();
      }
      acc.tail(4) += c.tail(4).cwiseAbs2();
    }
    parts[at(b)] = std::move(acc);
  });
  const Vector second = pairwise_sum(parts, 0, parts.size());

  McEstimate est;
  est.n_paths = N;
  est.seed = options.noise.seed;
  est.noise = options.noise.kind;
  const double dn = N;
  for (int k = 0; k < steps; ++k) {
    const Vector m = mean.segment(static_cast<Eigen::Index>(k) * n, n);
    const Matrix prod = Eigen::Map<const Matrix>(second.segment(2 * k * nn, nn).data(), n, n);
    const Matrix prod2 = Eigen::Map<const Matrix>(second.segment(2 * k * nn + nn, nn).data(), n, n);
    const Matrix cov = prod / (dn - 1);
    // Entrywise SE of the covariance: sample spread of the centered products.
    const Matrix pm = prod / dn;
    const Matrix pvar = ((prod2 / dn - pm.cwiseAbs2()) * dn / (dn - 1)).cwiseMax(0.0);
    est.mean_hat.push_back(m);
    est.mean_se.push_back((cov.diagonal().cwiseMax(0.0) / dn).cwiseSqrt());
    est.cov_hat.push_back(linalg::symmetrize(cov));
    est.cov_se.push_back((pvar / dn).cwiseSqrt());
  }
  auto scalar = [&](int j) {
    const double var = second(2 * steps * nn + j) / (dn - 1);
    return ScalarStat{mean(state_len + j), std::sqrt(std::max(0.0, var) / dn)};
  };
  est.jk = scalar(0);
  est.j2 = scalar(1);
  est.state_energy = scalar(2);
  est.h2_criterion = scalar(3);
  return est;
}

std::array<std::uint64_t, 4> particle_stream_key(int particles, int rep, int j) {
  return {1, static_cast<std::uint64_t>(particles), static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(j)};
}

VectorSeq particle_means(const MeanFieldSystem& system, const std::optional<LinearPolicy>& control,
                         const VectorSeq& disturbance, const Vector& x0, int particles, int rep,
                         const NoiseModel& noise) {
  if (particles < 1) throw std::invalid_argument("particle_means: need at least one particle");
  const auto& d = system.dims;
  const int K = d.horizon;
  if (!disturbance.empty() && static_cast<int>(disturbance.size()) != K + 1) {
    throw DimensionError("particle_means: disturbance needs one entry per stage");
  }
  if (control) control->check(d.q, d.n, K);

  std::vector<NoiseStream> streams;
  streams.reserve(at(particles));
  for (int j = 0; j < particles; ++j) streams.emplace_back(noise, particle_stream_key(particles, rep, j));

  std::vector<Vector> xs(at(particles), x0);
  VectorSeq means{x0};
  for (int k = 0; k <= K; ++k) {
    const auto& s = system.stage(k);
    const Vector v = disturbance.empty() ? Vector::Zero(d.l) : disturbance[at(k)];
    if (v.size() != d.l) throw DimensionError("particle_means: disturbance length mismatch");
    const Vector& avg = means.back();
    const Vector drift_common = s.At * avg + s.Bbb() * v;
    const Vector noise_common = s.Ct * avg + s.Dbb() * v;
    Vector sum = Vector::Zero(d.n);
    for (int j = 0; j < particles; ++j) {
      Vector& x = xs[at(j)];
      const Vector u = apply(control, k, x, avg, d.q).value;
      const double w = streams[at(j)].next();
      x = s.A * x + drift_common + s.F1 * u + w * (s.C * x + noise_common);
      sum += x;
    }
    means.push_back(sum / particles);
  }
  return means;
}

ParticleReport simulate_particle_system(const MeanFieldSystem& system, const std::optional<LinearPolicy>& control,
                                        const VectorSeq& disturbance, const Vector& x0,
                                        const ParticleOptions& options) {
  if (options.n_reps < 1) throw std::invalid_argument("simulate_particle_system: n_reps must be >= 1");
  const auto& d = system.dims;
  Policies limit;
  limit.control = control;
  limit.disturbance = disturbance.empty() ? LinearPolicy::zero(Channel::kDisturbance, d.l, d.n, d.horizon)
                                          : LinearPolicy::open_loop(Channel::kDisturbance, disturbance, d.n);
  const auto exact = propagate_moments(system, limit, x0);

  ParticleReport report;
  for (int M : options.counts) {
    ParticleLevel level;
    level.particles = M;
    level.deviations.assign(at(options.n_reps), 0.0);
    parallel_for(options.n_reps, options.threads, [&](int rep) {
      const auto means = particle_means(system, control, disturbance, x0, M, rep, options.noise);
      double dev = 0.0;
      for (std::size_t k = 0; k < means.size(); ++k) dev = std::max(dev, (means[k] - exact.mean[k]).norm());
      level.deviations[at(rep)] = dev;
    });
    level.median = median_of(level.deviations);
    double total = 0.0;
    for (double x : level.deviations) total += x;
    level.mean = total / options.n_reps;
    report.levels.push_back(std::move(level));
  }
  report.median_decreasing = true;
  for (std::size_t i = 1; i < report.levels.size(); ++i) {
    if (!(report.levels[i].median < report.levels[i - 1].median)) report.median_decreasing = false;
  }
  return report;
}

}  // namespace mfh
