#include "mfh/linalg.hpp"

#include <sstream>

namespace mfh {

const char* to_string(Operator op) {
  switch (op) {
    case Operator::kH: return "H";
    case Operator::kHt: return "Ht";
    case Operator::kH1: return "H1";
    case Operator::kHt1: return "Ht1";
  }
  return "?";
}

std::string FeasibilityFailure::describe() const {
  std::ostringstream os;
  os << "operator " << to_string(which) << " not positive definite at step k=" << step
     << " (min eigenvalue " << min_eigenvalue << ")";
  return os.str();
}

SingularCouplingError::SingularCouplingError(int step, double rcond)
    : std::runtime_error("coupled gain system singular at step k=" + std::to_string(step) +
                         " (rcond " + std::to_string(rcond) + ")"),
      step_(step),
      rcond_(rcond) {}

namespace linalg {

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double min_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("max_abs_diff: shape mismatch");
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

Matrix spd_solve(const Matrix& s, const Matrix& rhs) {
  Eigen::LDLT<Matrix> ldlt(s);
  return ldlt.solve(rhs);
}

}  // namespace linalg
}  // namespace mfh
