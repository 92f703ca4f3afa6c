#pragma once

#include "mfh/model.hpp"
#include "mfh/recursions.hpp"

#include <array>
#include <string>
#include <vector>

namespace mfh::reference {

/// Two-step (K = 2), 2x2 reference system with gamma = 0.8 and x0 = (1, 1).
MeanFieldSystem system();
constexpr double kGamma = 0.8;

/// One published row: a named 2x2 quantity at k = 0, 1, 2, rounded to 4 decimals.
struct GoldenRow {
  std::string name;  // H, Ht, H1, Ht1, U, Ut, V, Vt, P1, Q1, Pt1, Qt1
  std::array<Matrix, 3> by_step;  // index = k
};

/// The twelve rows of the published solution table.
const std::vector<GoldenRow>& golden_rows();

/// Tolerance matching the 4-decimal rounding of the published values.
constexpr double kGoldenTolerance = 5e-4;

struct RowDeviation {
  std::string name;
  double max_abs = 0.0;  // over k = 0, 1, 2 and all entries
};

/// Largest deviation of each published row from `solution`.
std::vector<RowDeviation> compare_to_golden(const H2HinfSolution& solution);

}  // namespace mfh::reference
