#include "naive.hpp"

#include <algorithm>

namespace oracle {

namespace {

std::size_t at(int k) { return static_cast<std::size_t>(k); }

double maxabs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Matrix g2I(double gamma, Eigen::Index l) { return gamma * gamma * Matrix::Identity(l, l); }

}  // namespace

Ops sbrl_ops(const mfh::StageParams& s, const Matrix& P, const Matrix& Q, double gamma) {
  const Matrix Abb = s.A + s.At, Bbb = s.B + s.Bt, Cbb = s.C + s.Ct, Dbb = s.D + s.Dt;
  const Eigen::Index l = s.B.cols();
  Ops o;
  o.L = Matrix(s.A.transpose() * P * s.A) + Matrix(s.C.transpose() * P * s.C) - Matrix(s.Phi.transpose() * s.Phi);
  o.G = Matrix(s.A.transpose() * P * s.B) + Matrix(s.C.transpose() * P * s.D);
  o.H = g2I(gamma, l) + Matrix(s.B.transpose() * P * s.B) + Matrix(s.D.transpose() * P * s.D);
  o.Lt = Matrix(Abb.transpose() * Q * Abb) + Matrix(Cbb.transpose() * P * Cbb) - Matrix(s.Phi.transpose() * s.Phi);
  o.Gt = Matrix(Abb.transpose() * Q * Bbb) + Matrix(Cbb.transpose() * P * Dbb);
  o.Ht = g2I(gamma, l) + Matrix(Bbb.transpose() * Q * Bbb) + Matrix(Dbb.transpose() * P * Dbb);
  return o;
}

FixedPoint fixed_point_gains(const mfh::StageParams& s, const Matrix& P1n, const Matrix& Q1n, const Matrix& Pt1n,
                             const Matrix& Qt1n, double gamma, double tol, int max_iterations) {
  const Matrix Abb = s.A + s.At, Bbb = s.B + s.Bt, Cbb = s.C + s.Ct, Dbb = s.D + s.Dt;
  const Eigen::Index n = s.A.rows(), l = s.B.cols(), q = s.F1.cols();
  const Matrix& F = s.F1;
  const Matrix Iq = Matrix::Identity(q, q);
  const Matrix Hinv = (g2I(gamma, l) + s.B.transpose() * P1n * s.B + s.D.transpose() * P1n * s.D).inverse();
  const Matrix Htinv = (g2I(gamma, l) + Bbb.transpose() * Q1n * Bbb + Dbb.transpose() * P1n * Dbb).inverse();
  const Matrix H1inv = (Iq + F.transpose() * Pt1n * F).inverse();
  const Matrix Ht1inv = (Iq + F.transpose() * Qt1n * F).inverse();

  FixedPoint fp;
  fp.U = Matrix::Zero(q, n);
  fp.V = Matrix::Zero(l, n);
  fp.Ubb = Matrix::Zero(q, n);
  fp.Vbb = Matrix::Zero(l, n);
  for (int it = 1; it <= max_iterations; ++it) {
    const Matrix U = -H1inv * (F.transpose() * Pt1n * (s.A + s.B * fp.V));
    const Matrix V = -Hinv * (s.B.transpose() * P1n * (s.A + F * U) + s.D.transpose() * P1n * s.C);
    const Matrix Ubb = -Ht1inv * (F.transpose() * Qt1n * (Abb + Bbb * fp.Vbb));
    const Matrix Vbb = -Htinv * (Bbb.transpose() * Q1n * (Abb + F * Ubb) + Dbb.transpose() * P1n * Cbb);
    const double change = std::max({maxabs(U - fp.U), maxabs(V - fp.V), maxabs(Ubb - fp.Ubb), maxabs(Vbb - fp.Vbb)});
    fp.U = U;
    fp.V = V;
    fp.Ubb = Ubb;
    fp.Vbb = Vbb;
    fp.iterations = it;
    const bool finite = U.allFinite() && V.allFinite() && Ubb.allFinite() && Vbb.allFinite();
    if (!finite) break;
    if (change < tol) {
      fp.converged = true;
      break;
    }
  }
  return fp;
}

double h2hinf_residual(const mfh::MeanFieldSystem& system, const mfh::H2HinfSolution& sol) {
  const int K = system.dims.horizon;
  const Eigen::Index n = system.dims.n, l = system.dims.l, q = system.dims.q;
  const Matrix In = Matrix::Identity(n, n), Iq = Matrix::Identity(q, q);
  const double w = sol.h2_state_weight;
  double worst = 0.0;
  for (int k = 0; k <= K; ++k) {
    const auto& s = system.stage(k);
    const Matrix Abb = s.A + s.At, Bbb = s.B + s.Bt, Cbb = s.C + s.Ct, Dbb = s.D + s.Dt;
    const Matrix& F = s.F1;
    const Matrix &P1 = sol.P1[at(k + 1)], &Q1 = sol.Q1[at(k + 1)], &Pt1 = sol.Pt1[at(k + 1)], &Qt1 = sol.Qt1[at(k + 1)];
    const Matrix& U = sol.U[at(k)];
    const Matrix& V = sol.V[at(k)];
    const Matrix Ubb = sol.U[at(k)] + sol.Ut[at(k)];
    const Matrix Vbb = sol.V[at(k)] + sol.Vt[at(k)];
    const Matrix PhiPhi = s.Phi.transpose() * s.Phi;

    const Matrix Au = s.A + F * U;
    const Matrix Gu = Au.transpose() * P1 * s.B + s.C.transpose() * P1 * s.D;
    const Matrix H = g2I(sol.gamma, l) + s.B.transpose() * P1 * s.B + s.D.transpose() * P1 * s.D;
    const Matrix P1k = Au.transpose() * P1 * Au + s.C.transpose() * P1 * s.C - PhiPhi - U.transpose() * U -
                       Gu * H.inverse() * Gu.transpose();

    const Matrix Abbu = Abb + F * Ubb;
    const Matrix Gtu = Abbu.transpose() * Q1 * Bbb + Cbb.transpose() * P1 * Dbb;
    const Matrix Ht = g2I(sol.gamma, l) + Bbb.transpose() * Q1 * Bbb + Dbb.transpose() * P1 * Dbb;
    const Matrix Q1k = Abbu.transpose() * Q1 * Abbu + Cbb.transpose() * P1 * Cbb - PhiPhi - Ubb.transpose() * Ubb -
                       Gtu * Ht.inverse() * Gtu.transpose();

    const Matrix Av = s.A + s.B * V, Cv = s.C + s.D * V;
    const Matrix Gv = Av.transpose() * Pt1 * F;
    const Matrix H1 = Iq + F.transpose() * Pt1 * F;
    const Matrix Pt1k = Av.transpose() * Pt1 * Av + Cv.transpose() * Pt1 * Cv + PhiPhi + w * In -
                        Gv * H1.inverse() * Gv.transpose();

    const Matrix Abbv = Abb + Bbb * Vbb, Cbbv = Cbb + Dbb * Vbb;
    const Matrix Gtv = Abbv.transpose() * Qt1 * F;
    const Matrix Ht1 = Iq + F.transpose() * Qt1 * F;
    const Matrix Qt1k = Abbv.transpose() * Qt1 * Abbv + Cbbv.transpose() * Pt1 * Cbbv + PhiPhi + w * In -
                        Gtv * Ht1.inverse() * Gtv.transpose();

    worst = std::max({worst, maxabs(sol.P1[at(k)] - P1k), maxabs(sol.Q1[at(k)] - Q1k),
                      maxabs(sol.Pt1[at(k)] - Pt1k), maxabs(sol.Qt1[at(k)] - Qt1k),
                      maxabs(V + H.inverse() * Gu.transpose()), maxabs(Vbb + Ht.inverse() * Gtu.transpose()),
                      maxabs(U + H1.inverse() * Gv.transpose()), maxabs(Ubb + Ht1.inverse() * Gtv.transpose())});
  }
  for (const auto* seq : {&sol.P1, &sol.Q1, &sol.Pt1, &sol.Qt1}) worst = std::max(worst, maxabs(seq->back()));
  return worst;
}

double sbrl_residual(const mfh::MeanFieldSystem& system, const mfh::SbrlSolution& sol) {
  double worst = 0.0;
  for (int k = 0; k <= system.dims.horizon; ++k) {
    const auto o = sbrl_ops(system.stage(k), sol.P[at(k + 1)], sol.Q[at(k + 1)], sol.gamma);
    worst = std::max({worst, maxabs(sol.P[at(k)] - (o.L - o.G * o.H.inverse() * o.G.transpose())),
                      maxabs(sol.Q[at(k)] - (o.Lt - o.Gt * o.Ht.inverse() * o.Gt.transpose())),
                      maxabs(sol.V[at(k)] + o.H.inverse() * o.G.transpose()),
                      maxabs(sol.Vbb[at(k)] + o.Ht.inverse() * o.Gt.transpose())});
  }
  return worst;
}

double lq_residual(const mfh::LqSystem& system, const mfh::LqSolution& sol) {
  double worst = 0.0;
  const Eigen::Index q = system.dims.q;
  const Matrix Iq = Matrix::Identity(q, q);
  for (int k = 0; k <= system.dims.horizon; ++k) {
    const auto& s = system.stage(k);
    const Matrix &P = sol.Pt[at(k + 1)], &Q = sol.Qt[at(k + 1)];
    const Matrix Abb = s.A1 + s.At1, Bbb = s.B1 + s.Bt1;
    const Matrix W = s.Phi1.transpose() * s.Phi1;
    const Matrix L1 = s.A1.transpose() * P * s.A1 + s.B1.transpose() * P * s.B1 + W;
    const Matrix G1 = s.A1.transpose() * P * s.F1;
    const Matrix H1 = Iq + s.F1.transpose() * P * s.F1;
    const Matrix Lt1 = Abb.transpose() * Q * Abb + Bbb.transpose() * P * Bbb + W;
    const Matrix Gt1 = Abb.transpose() * Q * s.F1;
    const Matrix Ht1 = Iq + s.F1.transpose() * Q * s.F1;
    worst = std::max({worst, maxabs(sol.Pt[at(k)] - (L1 - G1 * H1.inverse() * G1.transpose())),
                      maxabs(sol.Qt[at(k)] - (Lt1 - Gt1 * Ht1.inverse() * Gt1.transpose())),
                      maxabs(sol.U[at(k)] + H1.inverse() * G1.transpose()),
                      maxabs(sol.Ubb(k) + Ht1.inverse() * Gt1.transpose())});
  }
  return worst;
}

RawMoments raw_moments(const mfh::MeanFieldSystem& system, const mfh::Policies& policies, const Vector& x0) {
  const auto& d = system.dims;
  RawMoments r;
  r.mean.push_back(x0);
  r.second.push_back(x0 * x0.transpose());
  for (int k = 0; k <= d.horizon; ++k) {
    const auto& s = system.stage(k);
    Matrix Ku = Matrix::Zero(d.q, d.n), Kut = Matrix::Zero(d.q, d.n), Kv = Matrix::Zero(d.l, d.n),
           Kvt = Matrix::Zero(d.l, d.n);
    Vector hu = Vector::Zero(d.q), hv = Vector::Zero(d.l);
    if (policies.control) {
      Ku = policies.control->gains[at(k)];
      Kut = policies.control->mean_gains[at(k)];
      hu = policies.control->offset(k);
    }
    if (policies.disturbance) {
      Kv = policies.disturbance->gains[at(k)];
      Kvt = policies.disturbance->mean_gains[at(k)];
      hv = policies.disturbance->offset(k);
    }
    const Vector m = r.mean.back();
    const Matrix S = r.second.back();
    // u = Ku x + (Kut m + hu), v = Kv x + (Kvt m + hv); Ev = (Kv + Kvt) m + hv.
    const Vector cu = Kut * m + hu, cv = Kvt * m + hv;
    const Vector Ev = Kv * m + cv;

    // z energies: E|Phi x|^2 + E|u|^2 from the raw moment.
    const Matrix Sz = s.Phi * S * s.Phi.transpose();
    const Matrix Su = Ku * S * Ku.transpose() + Ku * m * cu.transpose() + cu * m.transpose() * Ku.transpose() +
                      cu * cu.transpose();
    const Matrix Sv = Kv * S * Kv.transpose() + Kv * m * cv.transpose() + cv * m.transpose() * Kv.transpose() +
                      cv * cv.transpose();
    r.output += Sz.trace() + Su.trace();
    r.disturbance += Sv.trace();

    const Matrix Ma = s.A + s.B * Kv + s.F1 * Ku;
    const Vector a = s.At * m + s.B * cv + s.Bt * Ev + s.F1 * cu;
    const Matrix Na = s.C + s.D * Kv;
    const Vector b = s.Ct * m + s.D * cv + s.Dt * Ev;
    const Matrix cross_a = Ma * m * a.transpose();
    const Matrix cross_b = Na * m * b.transpose();
    const Matrix S_next = Ma * S * Ma.transpose() + cross_a + cross_a.transpose() + a * a.transpose() +
                          Na * S * Na.transpose() + cross_b + cross_b.transpose() + b * b.transpose();
    r.mean.push_back(Ma * m + a);
    r.second.push_back(S_next);
  }
  return r;
}

}  // namespace oracle
