#include "generators.hpp"

namespace oracle {

mfh::Matrix Gen::matrix(Eigen::Index rows, Eigen::Index cols, double scale) {
  mfh::Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = scale * normal();
  return m;
}

mfh::Matrix Gen::symmetric(Eigen::Index n, double scale) {
  const mfh::Matrix m = matrix(n, n, scale);
  return 0.5 * (m + m.transpose());
}

mfh::Matrix Gen::orthogonal(Eigen::Index n) {
  Eigen::HouseholderQR<mfh::Matrix> qr(matrix(n, n, 1.0));
  return qr.householderQ() * mfh::Matrix::Identity(n, n);
}

mfh::MeanFieldSystem random_system(Gen& g, const mfh::Dimensions& d, double scale) {
  mfh::MeanFieldSystem sys;
  sys.dims = d;
  sys.x0 = g.vector(d.n, 1.0);
  for (int k = 0; k <= d.horizon; ++k) {
    mfh::StageParams s;
    s.A = g.matrix(d.n, d.n, scale);
    s.At = g.matrix(d.n, d.n, scale);
    s.C = g.matrix(d.n, d.n, scale);
    s.Ct = g.matrix(d.n, d.n, scale);
    s.B = g.matrix(d.n, d.l, scale);
    s.Bt = g.matrix(d.n, d.l, scale);
    s.D = g.matrix(d.n, d.l, scale);
    s.Dt = g.matrix(d.n, d.l, scale);
    s.F1 = g.matrix(d.n, d.q, scale);
    s.Phi = g.matrix(d.m_phi, d.n, scale);
    s.Psi = g.orthogonal(d.q);
    sys.stages.push_back(std::move(s));
  }
  return sys;
}

mfh::MeanFieldSystem random_feasible_system(Gen& g, const mfh::Dimensions& dims, double gamma, double scale) {
  for (int attempt = 0;; ++attempt) {
    auto sys = random_system(g, dims, scale);
    try {
      if (mfh::h2hinf_solve(sys, gamma)) return sys;
    } catch (const mfh::SingularCouplingError&) {
    }
    if (attempt % 4 == 3) scale *= 0.8;
  }
}

mfh::LqSystem random_lq_system(Gen& g, const mfh::Dimensions& d, double scale) {
  mfh::LqSystem sys;
  sys.dims = d;
  sys.x0_bar = g.vector(d.n, 1.0);
  for (int k = 0; k <= d.horizon; ++k) {
    mfh::LqStage s;
    s.A1 = g.matrix(d.n, d.n, scale);
    s.At1 = g.matrix(d.n, d.n, scale);
    s.B1 = g.matrix(d.n, d.n, scale);
    s.Bt1 = g.matrix(d.n, d.n, scale);
    s.F1 = g.matrix(d.n, d.q, scale);
    s.Phi1 = g.matrix(d.m_phi, d.n, scale);
    s.Psi1 = g.orthogonal(d.q);
    sys.stages.push_back(std::move(s));
  }
  return sys;
}

mfh::LinearPolicy random_policy(Gen& g, mfh::Channel channel, int width, int n, int horizon, double scale,
                                bool offsets) {
  return perturbed(g, mfh::LinearPolicy::zero(channel, width, n, horizon), scale, offsets);
}

mfh::LinearPolicy perturbed(Gen& g, const mfh::LinearPolicy& base, double scale, bool offsets) {
  mfh::LinearPolicy p = base;
  for (std::size_t k = 0; k < p.gains.size(); ++k) {
    p.gains[k] += g.matrix(p.gains[k].rows(), p.gains[k].cols(), scale);
    p.mean_gains[k] += g.matrix(p.mean_gains[k].rows(), p.mean_gains[k].cols(), scale);
  }
  if (offsets) {
    if (p.offsets.empty()) p.offsets.assign(p.gains.size(), mfh::Vector::Zero(p.width()));
    for (auto& h : p.offsets) h += g.vector(p.width(), scale);
  }
  return p;
}

mfh::MatrixSeq random_symmetric_seq(Gen& g, int n, int count, double scale) {
  mfh::MatrixSeq seq;
  for (int k = 0; k < count; ++k) seq.push_back(g.symmetric(n, scale));
  return seq;
}

}  // namespace oracle
