#include "mfh/model.hpp"
#include "mfh/reference_example.hpp"

#include "generators.hpp"

#include <gtest/gtest.h>

namespace mfh {
namespace {

bool has_violation(const ValidationReport& r, const std::string& needle) {
  for (const auto& v : r.violations)
    if (v.message.find(needle) != std::string::npos) return true;
  return false;
}

TEST(Validate, ReferenceSystemHasNoViolations) {
  const auto report = validate(reference::system());
  EXPECT_TRUE(report.ok()) << report.summary();
}

TEST(Validate, ReferencePsiIsExactlyOrthonormal) {
  const auto sys = reference::system();
  for (const auto& s : sys.stages) {
    const Matrix err = s.Psi.transpose() * s.Psi - Matrix::Identity(2, 2);
    EXPECT_LE(err.cwiseAbs().maxCoeff(), 1e-15);
  }
  Matrix rotation(2, 2);
  rotation << 0.6, -0.8, 0.8, 0.6;
  EXPECT_EQ(sys.stage(2).Psi, rotation);
}

TEST(Validate, ScaledPsiIsReported) {
  auto sys = reference::system();
  sys.stages[1].Psi = 2.0 * Matrix::Identity(2, 2);
  const auto report = validate(sys);
  ASSERT_FALSE(report.ok());
  EXPECT_TRUE(has_violation(report, "Psi not orthonormal at k")) << report.summary();
  EXPECT_EQ(report.violations.front().stage, 1);
}

TEST(Validate, WrongShapeIsReported) {
  auto sys = reference::system();
  sys.stages[0].B = Matrix::Zero(2, 3);
  const auto report = validate(sys);
  ASSERT_FALSE(report.ok());
  EXPECT_TRUE(has_violation(report, "dimension mismatch")) << report.summary();
  EXPECT_EQ(report.violations.front().field, "B");
}

TEST(Validate, NonFiniteEntryIsReported) {
  auto sys = reference::system();
  sys.stages[2].Ct(0, 1) = std::numeric_limits<double>::quiet_NaN();
  const auto report = validate(sys);
  ASSERT_FALSE(report.ok());
  EXPECT_TRUE(has_violation(report, "non-finite"));
}

TEST(Validate, StageCountMustMatchHorizon) {
  auto sys = reference::system();
  sys.stages.pop_back();
  EXPECT_FALSE(validate(sys).ok());
  EXPECT_THROW(require_valid(sys), DimensionError);
}

TEST(Validate, DoesNotMutateInput) {
  auto sys = reference::system();
  sys.stages[0].Psi *= 3.0;
  const auto copy = sys;
  (void)validate(sys);
  EXPECT_EQ(sys.stages[0].Psi, copy.stages[0].Psi);
}

TEST(StageParams, DerivedAccessorsAreExactSums) {
  oracle::Gen g(11);
  const auto sys = oracle::random_system(g, {3, 2, 2, 2, 4});
  for (const auto& s : sys.stages) {
    EXPECT_EQ(s.Abb(), s.A + s.At);
    EXPECT_EQ(s.Bbb(), s.B + s.Bt);
    EXPECT_EQ(s.Cbb(), s.C + s.Ct);
    EXPECT_EQ(s.Dbb(), s.D + s.Dt);
  }
}

TEST(MeanFieldSystem, ConstantReplicatesStage) {
  const Dimensions d{2, 1, 1, 1, 3};
  auto stage = StageParams::zeros(d);
  stage.A(0, 1) = 0.5;
  const auto sys = MeanFieldSystem::constant(d, stage, Vector::Ones(2));
  ASSERT_EQ(sys.stages.size(), 4u);
  for (const auto& s : sys.stages) EXPECT_EQ(s.A, stage.A);
  EXPECT_TRUE(validate(sys).ok());
}

TEST(LqSystem, FromMeanFieldMapsNoiseChannel) {
  const auto sys = reference::system();
  const auto lq = LqSystem::from_mean_field(sys);
  ASSERT_EQ(lq.stages.size(), sys.stages.size());
  for (int k = 0; k <= 2; ++k) {
    EXPECT_EQ(lq.stage(k).A1, sys.stage(k).A);
    EXPECT_EQ(lq.stage(k).At1, sys.stage(k).At);
    EXPECT_EQ(lq.stage(k).B1, sys.stage(k).C);
    EXPECT_EQ(lq.stage(k).Bt1, sys.stage(k).Ct);
    EXPECT_EQ(lq.stage(k).Phi1, sys.stage(k).Phi);
  }
  EXPECT_EQ(lq.x0_bar, sys.x0);
  EXPECT_TRUE(validate(lq).ok());
}

TEST(LqSystem, EmbeddingHasZeroDisturbance) {
  oracle::Gen g(5);
  const auto lq = oracle::random_lq_system(g, {2, 1, 2, 1, 2});
  const auto sys = lq.to_mean_field();
  EXPECT_TRUE(validate(sys).ok());
  for (const auto& s : sys.stages) {
    EXPECT_EQ(s.B.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(s.Dt.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(LqSystem, ValidateRejectsNonOrthonormalPsi) {
  oracle::Gen g(6);
  auto lq = oracle::random_lq_system(g, {2, 1, 2, 1, 1});
  lq.stages[0].Psi1 *= 1.5;
  EXPECT_FALSE(validate(lq).ok());
}

}  // namespace
}  // namespace mfh
