#include "hjlab/audit.hpp"

#include <gtest/gtest.h>

using namespace hjlab;

namespace {

const Box kUnit{Vec2(-1, -1), Vec2(1, 1)};

HamiltonianModel matrix_model(const Mat2& a, StandingConstants k) {
  MatrixFieldSpec spec;
  spec.base = a;
  return make_matrix_field_model(spec, k);
}

}  // namespace

TEST(Audit, ConstantDiagonalGrowth) {
  const auto m = matrix_model((Mat2() << 2, 0, 0, 1).finished(), {1.0, 2.0, 1.0, 0.25});
  const auto rep = audit_standing_assumptions(m, kUnit, 500, 3);
  EXPECT_NEAR(rep.r_hat, 1.0, 1e-12);
  EXPECT_NEAR(rep.R_hat, 2.0, 1e-12);
  EXPECT_EQ(rep.c0_hat, 0.0);
  EXPECT_FALSE(rep.alpha_hat.has_value());
  // growth holds with (1, 2); the curvature radii of the velocity ellipse are 1/2 and 4, so pinching does not
  for (const auto& v : rep.worst_violations) {
    if (v.inequality == "growth_lower" || v.inequality == "growth_upper" || v.inequality == "holder") {
      EXPECT_GE(v.residual, -1e-12) << v.inequality;
    }
    if (v.inequality == "pinch_inner" || v.inequality == "pinch_outer") {
      EXPECT_LT(v.residual, 0.0) << v.inequality;
    }
  }
  EXPECT_NEAR(rep.pinch_inner_hat, 0.5, 1e-6);
  EXPECT_NEAR(rep.pinch_outer_hat, 4.0, 1e-6);
}

TEST(Audit, IdentityHasNoSpatialVariation) {
  const auto m = matrix_model(Mat2::Identity(), {0.5, 2.0, 1.0, 0.25});
  const auto rep = audit_standing_assumptions(m, kUnit, 200, 1);
  EXPECT_EQ(rep.c0_hat, 0.0);
  EXPECT_NEAR(rep.r_hat, 1.0, 1e-12);
  EXPECT_NEAR(rep.R_hat, 1.0, 1e-12);
  EXPECT_NEAR(rep.pinch_inner_hat, 1.0, 1e-6);
  EXPECT_NEAR(rep.pinch_outer_hat, 1.0, 1e-6);
}

TEST(Audit, BumpExponentRecovered) {
  MatrixFieldSpec spec;
  spec.perturbations.push_back({make_power_bump_field(Vec2(0.1, 0.2), 0.5, 0.6), Mat2::Identity()});
  const auto m = make_matrix_field_model(spec, {1.0, 2.5, 0.5, 0.3});
  const auto rep = audit_standing_assumptions(m, kUnit, 2000, 5);
  ASSERT_TRUE(rep.alpha_hat.has_value());
  EXPECT_GE(*rep.alpha_hat, 0.25);
  EXPECT_LE(*rep.alpha_hat, 0.35);
  EXPECT_LE(rep.c0_hat, 0.5 + 1e-9);
  EXPECT_GT(rep.c0_hat, 0.4);
}

TEST(Audit, DeclaredViolationIsReported) {
  // true minimum speed is 1, declared 1.5
  const auto m = matrix_model((Mat2() << 2, 0, 0, 1).finished(), {1.5, 2.0, 1.0, 0.25});
  const auto rep = audit_standing_assumptions(m, kUnit, 200, 3);
  EXPECT_FALSE(rep.declared_constants_hold());
  bool found = false;
  for (const auto& s : rep.worst_violations) {
    if (s.residual < 0) found = true;
  }
  EXPECT_TRUE(found);
}

TEST(Audit, IndependentOfThreadCount) {
  MatrixFieldSpec spec;
  spec.perturbations.push_back({make_power_bump_field(Vec2(0.0, 0.0), 0.3, 0.5), Mat2::Identity()});
  const auto m = make_matrix_field_model(spec, {1.0, 2.0, 0.5, 0.25});
  AuditOptions a, b;
  b.threads = 4;
  const auto ra = audit_standing_assumptions(m, kUnit, 300, 9, a);
  const auto rb = audit_standing_assumptions(m, kUnit, 300, 9, b);
  EXPECT_EQ(ra.r_hat, rb.r_hat);
  EXPECT_EQ(ra.R_hat, rb.R_hat);
  EXPECT_EQ(ra.c0_hat, rb.c0_hat);
  EXPECT_EQ(ra.alpha_hat, rb.alpha_hat);
  EXPECT_EQ(ra.pinch_inner_hat, rb.pinch_inner_hat);
  EXPECT_EQ(ra.pinch_outer_hat, rb.pinch_outer_hat);
}

TEST(Audit, TooFewSamples) {
  const auto m = matrix_model(Mat2::Identity(), {0.5, 2.0, 1.0, 0.25});
  EXPECT_THROW(audit_standing_assumptions(m, kUnit, 99, 1), ConfigError);
}
