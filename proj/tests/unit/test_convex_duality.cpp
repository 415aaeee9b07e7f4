#include "hjlab/convex_duality.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

using namespace hjlab;

namespace {

HamiltonianModel matrix_model(const Mat2& a, StandingConstants k = {1.0, 2.0, 1.0, 0.25}) {
  MatrixFieldSpec spec;
  spec.base = a;
  return make_matrix_field_model(spec, k);
}

const Mat2 kDiag21 = (Mat2() << 2, 0, 0, 1).finished();

HamiltonianModel bump_model() {
  MatrixFieldSpec spec;
  spec.perturbations.push_back({make_power_bump_field(Vec2(0.1, -0.2), 0.5, 0.6), Mat2::Identity()});
  return make_matrix_field_model(spec, {1.0, 2.0, 0.5, 0.3});
}

}  // namespace

TEST(SpherePartition, UnitDistinctDeterministic) {
  const auto p = SpherePartition::from_level(4);
  ASSERT_EQ(p.size(), 720u);
  std::set<std::pair<double, double>> seen;
  for (const auto& d : p.directions) {
    EXPECT_NEAR(d.norm(), 1.0, 1e-12);
    seen.insert({d.x(), d.y()});
  }
  EXPECT_EQ(seen.size(), p.size());
  const auto q = SpherePartition::from_level(4);
  EXPECT_EQ(p.angles, q.angles);
  EXPECT_EQ(SpherePartition::from_level(0).size(), 45u);
  EXPECT_THROW(SpherePartition::with_count(2), ConfigError);
}

TEST(PolarNumeric, Examples) {
  const auto iso = matrix_model(Mat2::Identity(), {0.5, 2, 1, 0.25});
  const auto an = matrix_model(kDiag21);
  EXPECT_NEAR(polar_eval_numeric(iso, Vec2::Zero(), Vec2(0, 3)), 3.0, 1e-12);
  EXPECT_NEAR(polar_eval_numeric(an, Vec2::Zero(), Vec2(1, 0)), 0.5, 1e-6);
  EXPECT_NEAR(polar_eval_numeric(an, Vec2::Zero(), Vec2(0, 1)), 1.0, 1e-6);
  EXPECT_THROW(polar_eval_numeric(an, Vec2::Zero(), Vec2::Zero()), DomainError);
}

TEST(PolarNumeric, MonotoneInLevel) {
  const auto m = bump_model();
  std::mt19937_64 rng(2);
  for (int k = 0; k < 50; ++k) {
    const Vec2 x = oracle::random_point(rng, -1, 1), q = oracle::random_unit(rng);
    double prev = 0.0;
    for (int level = 0; level <= 4; ++level) {
      const double v = polar_eval_numeric(m, x, q, SpherePartition::from_level(level), 0);
      EXPECT_GE(v, prev - 1e-15);
      prev = v;
    }
  }
}

TEST(PolarGradNumeric, Examples) {
  const auto iso = matrix_model(Mat2::Identity(), {0.5, 2, 1, 0.25});
  const auto an = matrix_model(kDiag21);
  EXPECT_LT((polar_grad_numeric(iso, Vec2::Zero(), Vec2(0, 2)) - Vec2(0, 1)).norm(), 1e-12);
  EXPECT_LT((polar_grad_numeric(an, Vec2::Zero(), Vec2(1, 0)) - Vec2(0.5, 0)).norm(), 1e-6);
  const Vec2 q(0.3, -0.7);
  EXPECT_LT((polar_grad_numeric(an, Vec2::Zero(), q) - polar_grad_numeric(an, Vec2::Zero(), 5 * q)).norm(), 1e-10);
  EXPECT_THROW(polar_grad_numeric(an, Vec2::Zero(), Vec2::Zero()), DomainError);
}

TEST(PolarGradNumeric, FlatFaceIsADefect) {
  // l-infinity norm: its unit ball is a square, so the polar program has flat faces.
  const auto sq = make_generic_model([](const Vec2&, const Vec2& p) { return p.cwiseAbs().maxCoeff(); },
                                     {0.5, 1.5, 1, 0.25});
  EXPECT_THROW(polar_grad_numeric(sq, Vec2::Zero(), Vec2(1, 0)), ModelDefect);
}

TEST(PolarNumeric, MatchesClosedFormAndBipolar) {
  const auto m = bump_model();
  std::mt19937_64 rng(17);
  NumericParams np;
  np.partition_count = 180;
  const auto polar_model = make_polar_model(m, np);
  for (int k = 0; k < 200; ++k) {
    const Vec2 x = oracle::random_point(rng, -1, 1);
    const Vec2 q = oracle::random_unit(rng) * 2.0;
    const double exact = m.polar(x, q);
    EXPECT_LE(std::abs(polar_eval_numeric(m, x, q) - exact), 1e-6 * exact);
    const double h = m.eval_h(x, q);
    EXPECT_LE(std::abs(polar_model.polar(x, q) - h), 1e-5 * h);
  }
}

TEST(SupportIdentity, Examples) {
  const auto iso = matrix_model(Mat2::Identity(), {0.5, 2, 1, 0.25});
  auto r = check_support_identity(iso, Vec2::Zero(), Vec2(1, 0));
  EXPECT_LE(r[0].lhs, 1e-10);
  EXPECT_LE(r[1].lhs - r[1].rhs, 1e-10);
  const auto an = matrix_model(kDiag21);
  r = check_support_identity(an, Vec2::Zero(), Vec2(1, 1));
  EXPECT_LE(r[0].lhs, 1e-8);
  EXPECT_LE(r[1].lhs - r[1].rhs, 1e-8);
  r = check_support_identity(an, Vec2::Zero(), Vec2(0.3, 1), SpherePartition::from_level(0));
  EXPECT_GE(r[1].margin, -1e-12);
  EXPECT_EQ(r[1].margin, r[1].rhs - r[1].lhs);
}

TEST(FHolder, Examples) {
  const auto an = matrix_model(kDiag21);
  const LemmaConstants c = declared_constants(an.constants());
  const auto same = check_f_holder(an, Vec2(0.1, 0.2), Vec2(0.1, 0.2), Vec2(1, 0), c);
  EXPECT_EQ(same.lhs, 0.0);
  EXPECT_GE(same.margin, 0.0);
  std::mt19937_64 rng(4);
  for (int k = 0; k < 100; ++k) {
    const auto r = check_f_holder(an, oracle::random_point(rng, -1, 1), oracle::random_point(rng, -1, 1),
                                  oracle::random_unit(rng), c);
    EXPECT_EQ(r.lhs, 0.0);
  }
}

TEST(DirectionSandwich, Examples) {
  const auto iso = matrix_model(Mat2::Identity(), {0.5, 2, 1, 0.25});
  const LemmaConstants unit{1, 1, 1, 1, 0, 0.25};
  auto r = check_direction_sandwich(iso, Vec2::Zero(), Vec2(1, 2), Vec2(1, 2), unit);
  EXPECT_EQ(r[0].lhs, 0.0);
  EXPECT_EQ(r[1].lhs, 0.0);
  r = check_direction_sandwich(iso, Vec2::Zero(), Vec2(1, 0), Vec2(-1, 0), unit);
  EXPECT_NEAR(r[0].lhs, 2.0, 1e-15);
  EXPECT_NEAR(r[0].rhs, 2.0, 1e-15);
  EXPECT_GE(r[0].margin, -1e-15);
  EXPECT_GE(r[1].margin, -1e-15);
}

TEST(CurvaturePinching, Examples) {
  const auto iso = matrix_model(Mat2::Identity(), {0.5, 2, 1, 0.25});
  const LemmaConstants unit{1, 1, 1, 1, 0, 0.25};
  auto r = check_curvature_pinching(iso, Vec2::Zero(), Vec2(1, 1), Vec2(1, 1), unit);
  EXPECT_EQ(r[0].margin, 0.0);
  EXPECT_EQ(r[1].margin, 0.0);
  const double ang = 1.1;
  r = check_curvature_pinching(iso, Vec2::Zero(), Vec2(1, 0), unit_vector(ang), unit);
  EXPECT_NEAR(r[0].rhs, std::cos(ang) - 1.0, 1e-15);
  EXPECT_NEAR(r[0].lhs, std::cos(ang) - 1.0, 1e-15);
  EXPECT_NEAR(r[1].rhs, std::cos(ang) - 1.0, 1e-15);

  // ellipse with semi-axes 2 and 1: rolling radii 1/2 and 4
  const auto an = matrix_model(kDiag21);
  const LemmaConstants ell{1, 2, 0.5, 4, 0, 0.25};
  std::mt19937_64 rng(9);
  for (int k = 0; k < 1000; ++k) {
    const auto rr = check_curvature_pinching(an, Vec2::Zero(), oracle::random_unit(rng), oracle::random_unit(rng), ell);
    EXPECT_GE(rr[0].margin, -1e-8);
    EXPECT_GE(rr[1].margin, -1e-8);
  }
}

TEST(PolarGrowthHolder, Examples) {
  const auto iso = matrix_model(Mat2::Identity(), {0.5, 2, 1, 0.25});
  const LemmaConstants unit{1, 1, 1, 1, 0, 0.25};
  const auto r = check_polar_growth_and_holder(iso, Vec2(0.2, 0.1), Vec2(0.2, 0.1), Vec2(0, 1), unit);
  EXPECT_DOUBLE_EQ(r[0].rhs, 1.0);
  EXPECT_EQ(r[0].margin, 0.0);
  EXPECT_EQ(r[1].margin, 0.0);
  EXPECT_EQ(r[2].lhs, 0.0);
}

TEST(GradientDuality, Examples) {
  const auto iso = matrix_model(Mat2::Identity(), {0.5, 2, 1, 0.25});
  EXPECT_LE(check_gradient_duality(iso, Vec2::Zero(), Vec2(1, 0)).lhs, 1e-10);
  const auto an = matrix_model(kDiag21);
  EXPECT_LE(check_gradient_duality(an, Vec2::Zero(), Vec2(1, 1)).lhs, 1e-12);
  EXPECT_LE(check_gradient_duality(an, Vec2::Zero(), Vec2(1, 1), default_partition(), 40, DualityRoute::numeric_polar).lhs,
            1e-6);
}

TEST(GradientDuality, SupportPointExtremality) {
  const auto m = bump_model();
  std::mt19937_64 rng(21);
  for (int k = 0; k < 500; ++k) {
    const Vec2 x = oracle::random_point(rng, -1, 1), q = oracle::random_unit(rng) * 0.8;
    EXPECT_LE(std::abs(m.polar_grad(x, q).dot(q) - m.polar(x, q)), 1e-8 * q.norm());
  }
}

TEST(PolarLipschitz, EuclideanBound) {
  const auto iso = matrix_model(Mat2::Identity(), {0.5, 2, 1, 0.25});
  const double est = estimate_polar_grad_lipschitz(iso, Vec2::Zero(), 100000, 3);
  EXPECT_LE(est, 2.0 + 1e-6);
  EXPECT_GT(est, 1.0);
  EXPECT_THROW(estimate_polar_grad_lipschitz(iso, Vec2::Zero(), 99, 3), ConfigError);
}

TEST(PolarLipschitz, ScalingHasNoIncrement) {
  const auto an = matrix_model(kDiag21);
  const Vec2 q(0.4, 0.9);
  EXPECT_LE((an.polar_grad(Vec2::Zero(), q) - an.polar_grad(Vec2::Zero(), 3.7 * q)).norm(), 1e-15);
}

TEST(PolarLipschitz, StableUnderDoubling) {
  const auto an = matrix_model(kDiag21);
  const double a = estimate_polar_grad_lipschitz(an, Vec2::Zero(), 20000, 5);
  const double b = estimate_polar_grad_lipschitz(an, Vec2::Zero(), 40000, 5);
  EXPECT_TRUE(std::isfinite(a));
  EXPECT_NEAR(b / a, 1.0, 0.05);
}

TEST(PolarLowerCurvature, EllipseRollingRadius) {
  const auto an = matrix_model(kDiag21);
  // unit sublevel set of |diag(2,1)p| has semi-axes 1/2 and 1; largest curvature radius 1^2 / (1/2) = 2
  const double rad = polar_rolling_radius(an, Vec2::Zero());
  EXPECT_NEAR(rad, 2.0, 1e-6);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> a(0, 2 * kPi);
  for (int k = 0; k < 1000; ++k) {
    EXPECT_LE(check_polar_lower_curvature(an, Vec2::Zero(), a(rng), a(rng), rad).lhs, 1e-8);
  }
}

TEST(LemmaSuite, DeterministicAndCsv) {
  const auto m = bump_model();
  LemmaSuiteSpec spec;
  spec.samples_per_lemma = 50;
  spec.seed = 4;
  const auto c = declared_constants(m.constants());
  const auto a = run_lemma_suite(m, c, spec);
  spec.threads = 3;
  const auto b = run_lemma_suite(m, c, spec);
  ASSERT_EQ(a.size(), b.size());
  std::ostringstream sa, sb;
  write_residuals_csv(sa, a);
  write_residuals_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(sa.str().substr(0, 35), "lemma_id,sample_index,lhs,rhs,margi");
  for (const auto& r : a) EXPECT_EQ(r.margin, r.rhs - r.lhs);
}
