#pragma once

#include "mfh/types.hpp"

namespace mfh::linalg {

/// (M + M^T) / 2
Matrix symmetrize(const Matrix& m);

double min_eigenvalue(const Matrix& m);
double max_eigenvalue(const Matrix& m);

/// Largest absolute entry of a - b.
double max_abs_diff(const Matrix& a, const Matrix& b);

bool all_finite(const Matrix& m);

/// Solves S X = R for symmetric positive definite S without forming S^{-1}.
Matrix spd_solve(const Matrix& s, const Matrix& rhs);

}  // namespace mfh::linalg
