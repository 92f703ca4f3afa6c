#include "mfh/model.hpp"

#include <cmath>
#include <sstream>

namespace mfh {

StageParams StageParams::zeros(const Dimensions& d) {
  StageParams s;
  s.A = Matrix::Zero(d.n, d.n);
  s.At = Matrix::Zero(d.n, d.n);
  s.C = Matrix::Zero(d.n, d.n);
  s.Ct = Matrix::Zero(d.n, d.n);
  s.B = Matrix::Zero(d.n, d.l);
  s.Bt = Matrix::Zero(d.n, d.l);
  s.D = Matrix::Zero(d.n, d.l);
  s.Dt = Matrix::Zero(d.n, d.l);
  s.F1 = Matrix::Zero(d.n, d.q);
  s.Phi = Matrix::Zero(d.m_phi, d.n);
  s.Psi = Matrix::Identity(d.q, d.q);
  return s;
}

MeanFieldSystem MeanFieldSystem::constant(const Dimensions& dims, const StageParams& stage, Vector x0) {
  MeanFieldSystem sys;
  sys.dims = dims;
  sys.stages.assign(static_cast<std::size_t>(dims.stage_count()), stage);
  sys.x0 = std::move(x0);
  return sys;
}

LqSystem LqSystem::from_mean_field(const MeanFieldSystem& system) {
  LqSystem lq;
  lq.dims = system.dims;
  lq.x0_bar = system.x0;
  for (const auto& s : system.stages) {
    lq.stages.push_back(LqStage{s.A, s.At, s.C, s.Ct, s.F1, s.Phi, s.Psi});
  }
  return lq;
}

MeanFieldSystem LqSystem::to_mean_field() const {
  MeanFieldSystem sys;
  sys.dims = dims;
  sys.dims.l = 1;
  sys.x0 = x0_bar;
  for (const auto& s : stages) {
    StageParams p = StageParams::zeros(sys.dims);
    p.A = s.A1;
    p.At = s.At1;
    p.C = s.B1;
    p.Ct = s.Bt1;
    p.F1 = s.F1;
    p.Phi = s.Phi1;
    p.Psi = s.Psi1;
    sys.stages.push_back(std::move(p));
  }
  return sys;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& v : violations) {
    if (v.stage >= 0) os << "stages[" << v.stage << "]";
    if (!v.field.empty()) os << (v.stage >= 0 ? "." : "") << v.field;
    os << ": " << v.message << "\n";
  }
  return os.str();
}

namespace {

class Checker {
 public:
  explicit Checker(ValidationReport& report) : report_(report) {}

  void shape(int k, const char* field, const Matrix& m, int rows, int cols) {
    if (m.rows() != rows || m.cols() != cols) {
      std::ostringstream os;
      os << "dimension mismatch: expected " << rows << "x" << cols << ", got " << m.rows() << "x"
         << m.cols();
      add(k, field, os.str());
    } else if (!m.allFinite()) {
      add(k, field, "non-finite entry");
    }
  }

  void orthonormal(int k, const char* field, const Matrix& psi, double tol) {
    if (psi.rows() != psi.cols()) return;
    const Matrix gram = psi.transpose() * psi;
    const Matrix eye = Matrix::Identity(psi.cols(), psi.cols());
    if (gram.size() > 0 && (gram - eye).cwiseAbs().maxCoeff() > tol) {
      std::ostringstream os;
      os << field << " not orthonormal at k=" << k << " (max |Psi'Psi - I| = "
         << (gram - eye).cwiseAbs().maxCoeff() << ")";
      add(k, field, os.str());
    }
  }

  void add(int k, std::string field, std::string message) {
    report_.violations.push_back(Violation{k, std::move(field), std::move(message)});
  }

 private:
  ValidationReport& report_;
};

void check_dims(const Dimensions& d, Checker& c, bool needs_l) {
  if (d.n < 1) c.add(-1, "dims.n", "must be >= 1");
  if (needs_l && d.l < 1) c.add(-1, "dims.l", "must be >= 1");
  if (d.q < 1) c.add(-1, "dims.q", "must be >= 1");
  if (d.m_phi < 1) c.add(-1, "dims.m_phi", "must be >= 1");
  if (d.horizon < 0) c.add(-1, "horizon", "must be >= 0");
}

}  // namespace

ValidationReport validate(const MeanFieldSystem& system, const ValidationOptions& options) {
  ValidationReport report;
  Checker c(report);
  const Dimensions& d = system.dims;
  check_dims(d, c, true);
  if (!report.ok()) return report;

  if (static_cast<int>(system.stages.size()) != d.stage_count()) {
    c.add(-1, "stages", "expected " + std::to_string(d.stage_count()) + " stages, got " +
                            std::to_string(system.stages.size()));
  }
  if (system.x0.size() != d.n) c.add(-1, "x0", "dimension mismatch: expected length " + std::to_string(d.n));
  else if (!system.x0.allFinite()) c.add(-1, "x0", "non-finite entry");

  for (int k = 0; k < static_cast<int>(system.stages.size()); ++k) {
    const auto& s = system.stages[static_cast<std::size_t>(k)];
    c.shape(k, "A", s.A, d.n, d.n);
    c.shape(k, "At", s.At, d.n, d.n);
    c.shape(k, "C", s.C, d.n, d.n);
    c.shape(k, "Ct", s.Ct, d.n, d.n);
    c.shape(k, "B", s.B, d.n, d.l);
    c.shape(k, "Bt", s.Bt, d.n, d.l);
    c.shape(k, "D", s.D, d.n, d.l);
    c.shape(k, "Dt", s.Dt, d.n, d.l);
    c.shape(k, "F1", s.F1, d.n, d.q);
    c.shape(k, "Phi", s.Phi, d.m_phi, d.n);
    c.shape(k, "Psi", s.Psi, d.q, d.q);
    c.orthonormal(k, "Psi", s.Psi, options.psi_tol);
  }
  return report;
}

ValidationReport validate(const LqSystem& system, const ValidationOptions& options) {
  ValidationReport report;
  Checker c(report);
  const Dimensions& d = system.dims;
  check_dims(d, c, false);
  if (!report.ok()) return report;

  if (static_cast<int>(system.stages.size()) != d.stage_count()) {
    c.add(-1, "stages", "expected " + std::to_string(d.stage_count()) + " stages, got " +
                            std::to_string(system.stages.size()));
  }
  if (system.x0_bar.size() != d.n) c.add(-1, "x0", "dimension mismatch: expected length " + std::to_string(d.n));

  for (int k = 0; k < static_cast<int>(system.stages.size()); ++k) {
    const auto& s = system.stages[static_cast<std::size_t>(k)];
    c.shape(k, "A1", s.A1, d.n, d.n);
    c.shape(k, "At1", s.At1, d.n, d.n);
    c.shape(k, "B1", s.B1, d.n, d.n);
    c.shape(k, "Bt1", s.Bt1, d.n, d.n);
    c.shape(k, "F1", s.F1, d.n, d.q);
    c.shape(k, "Phi1", s.Phi1, d.m_phi, d.n);
    c.shape(k, "Psi1", s.Psi1, d.q, d.q);
    c.orthonormal(k, "Psi1", s.Psi1, options.psi_tol);
  }
  return report;
}

void require_valid(const MeanFieldSystem& system, const ValidationOptions& options) {
  const auto report = validate(system, options);
  if (!report.ok()) throw DimensionError("invalid system: " + report.summary());
}

}  // namespace mfh
