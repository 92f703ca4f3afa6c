#include "mfh/reference_example.hpp"

#include <algorithm>

namespace mfh::reference {
namespace {

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

MeanFieldSystem system() {
  Dimensions dims{2, 2, 2, 2, 2};
  MeanFieldSystem sys;
  sys.dims = dims;
  sys.x0 = Vector::Ones(2);
  sys.stages.resize(3);

  auto& s0 = sys.stages[0];
  s0.A = m2(0.05, 0.15, 0.25, 0.35);
  s0.At = m2(0.05, 0.25, 0.35, 0.20);
  s0.B = m2(0.05, 0.10, 0.10, 0.20);
  s0.Bt = m2(0.05, 0.15, 0.20, 0.20);
  s0.C = m2(0.05, 0.25, 0.10, 0.25);
  s0.Ct = m2(0.05, 0.15, 0.25, 0.15);
  s0.D = m2(0.05, 0.18, 0.15, 0.28);
  s0.Dt = m2(0.05, 0.30, 0.25, 0.35);
  s0.F1 = m2(0.05, 0.25, 0.35, 0.30);
  s0.Phi = m2(0.05, 0.10, 0.30, 0.20);
  s0.Psi = m2(0.8, 0.6, 0.6, -0.8);

  auto& s1 = sys.stages[1];
  s1.A = m2(0.10, 0.08, 0.18, 0.12);
  s1.At = m2(0.10, 0.12, 0.22, 0.08);
  s1.B = m2(0.10, 0.18, 0.20, 0.28);
  s1.Bt = m2(0.10, 0.20, 0.25, 0.08);
  s1.C = m2(0.10, 0.12, 0.18, 0.10);
  s1.Ct = m2(0.10, 0.08, 0.15, 0.08);
  s1.D = m2(0.10, 0.12, 0.20, 0.18);
  s1.Dt = m2(0.10, 0.40, 0.10, 0.15);
  s1.F1 = m2(0.10, 0.30, 0.25, 0.10);
  s1.Phi = m2(0.10, 0.25, 0.10, 0.20);
  s1.Psi = m2(1.0, 0.0, 0.0, 1.0);

  auto& s2 = sys.stages[2];
  s2.A = m2(0.15, 0.10, 0.20, 0.15);
  s2.At = m2(0.15, 0.15, 0.25, 0.10);
  s2.B = m2(0.15, 0.20, 0.20, 0.30);
  s2.Bt = m2(0.15, 0.25, 0.30, 0.10);
  s2.C = m2(0.15, 0.15, 0.20, 0.15);
  s2.Ct = m2(0.15, 0.10, 0.20, 0.10);
  s2.D = m2(0.15, 0.10, 0.15, 0.20);
  s2.Dt = m2(0.15, 0.15, 0.20, 0.25);
  s2.F1 = m2(0.15, 0.20, 0.15, 0.20);
  s2.Phi = m2(0.15, 0.15, 0.20, 0.30);
  s2.Psi = m2(0.6, -0.8, 0.8, 0.6);
  return sys;
}

const std::vector<GoldenRow>& golden_rows() {
  // by_step = {k=0, k=1, k=2}
  static const std::vector<GoldenRow> rows = {
      {"H", {m2(0.6346, -0.0112, -0.0112, 0.6166), m2(0.6232, -0.0210, -0.0210, 0.6127),
             m2(0.64, 0, 0, 0.64)}},
      {"Ht", {m2(0.5950, -0.0801, -0.0801, 0.4948), m2(0.5773, -0.0790, -0.0790, 0.5364),
              m2(0.64, 0, 0, 0.64)}},
      {"H1", {m2(1.1489, 0.1480, 0.1480, 1.1925), m2(1.0843, 0.0667, 0.0667, 1.1117),
              m2(1, 0, 0, 1)}},
      {"Ht1", {m2(1.1902, 0.2139, 0.2139, 1.2985), m2(1.0843, 0.0667, 0.0667, 1.1117),
               m2(1, 0, 0, 1)}},
      {"U", {m2(-0.0848, -0.1243, -0.0840, -0.1399), m2(-0.0605, -0.0419, -0.0517, -0.0385),
             m2(0, 0, 0, 0)}},
      {"Ut", {m2(-0.1902, -0.1908, -0.2225, -0.2947), m2(-0.0975, -0.0525, -0.0829, -0.0630),
              m2(0, 0, 0, 0)}},
      {"V", {m2(0.0090, 0.0202, 0.0186, 0.0422), m2(0.0243, 0.0176, 0.0298, 0.0215),
             m2(0, 0, 0, 0)}},
      {"Vt", {m2(0.0891, 0.1179, 0.1550, 0.2060), m2(0.0905, 0.0575, 0.1194, 0.0769),
              m2(0, 0, 0, 0)}},
      {"P1", {m2(-0.1141, -0.1012, -0.1012, -0.1148), m2(-0.0396, -0.0593, -0.0593, -0.1129),
              m2(-0.0625, -0.0825, -0.0825, -0.1125)}},
      {"Q1", {m2(-0.3248, -0.3715, -0.3715, -0.4619), m2(-0.1286, -0.1167, -0.1167, -0.1502),
              m2(-0.0625, -0.0825, -0.0825, -0.1125)}},
      {"Pt1", {m2(1.1729, 0.2114, 0.2114, 1.3676), m2(1.1255, 0.1195, 0.1195, 1.1585),
               m2(1.0625, 0.0825, 0.0825, 1.1125)}},
      {"Qt1", {m2(2.0130, 1.2515, 1.2515, 2.8022), m2(1.6674, 0.4629, 0.4629, 1.3867),
               m2(1.0625, 0.0825, 0.0825, 1.1125)}},
  };
  return rows;
}

}  // namespace mfh::reference

namespace mfh::reference {

std::vector<RowDeviation> compare_to_golden(const H2HinfSolution& solution) {
  std::vector<RowDeviation> out;
  for (const auto& row : golden_rows()) {
    const auto& seq = solution.sequence(row.name);
    if (seq.size() < row.by_step.size()) throw DimensionError("compare_to_golden: solution horizon too short");
    RowDeviation dev{row.name, 0.0};
    for (std::size_t k = 0; k < row.by_step.size(); ++k) {
      if (seq[k].rows() != row.by_step[k].rows() || seq[k].cols() != row.by_step[k].cols()) {
        throw DimensionError("compare_to_golden: shape mismatch in " + row.name);
      }
      dev.max_abs = std::max(dev.max_abs, (seq[k] - row.by_step[k]).cwiseAbs().maxCoeff());
    }
    out.push_back(dev);
  }
  return out;
}

}  // namespace mfh::reference
