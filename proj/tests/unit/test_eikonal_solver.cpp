#include "hjlab/eikonal_solver.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hjlab;

namespace {

const Box kBox{Vec2(-1.2, -1.2), Vec2(1.2, 1.2)};

HamiltonianModel matrix_model(const Mat2& a, StandingConstants k) {
  MatrixFieldSpec spec;
  spec.base = a;
  return make_matrix_field_model(spec, k);
}

const HamiltonianModel& iso() {
  static const auto m = matrix_model(Mat2::Identity(), {0.5, 2, 1, 0.25});
  return m;
}

}  // namespace

TEST(Grid, Square) {
  const auto g = GridSpec::square(kBox, 129);
  EXPECT_DOUBLE_EQ(g.spacing, 2.4 / 128);
  EXPECT_NEAR((g.node(128, 128) - kBox.hi).norm(), 0.0, 1e-14);
  EXPECT_EQ(g.index(3, 2), 2u * 129 + 3);
}

TEST(Domain, DiscArea) {
  const auto mask = build_domain(BallShape{}, GridSpec::square(kBox, 129));
  const double h = mask.grid.spacing;
  EXPECT_NEAR(mask.inside_count * h * h / kPi, 1.0, 0.02);
  EXPECT_EQ(count_boundary_components(mask), 1);
  for (std::size_t k = 0; k < mask.grid.size(); ++k) EXPECT_FALSE(mask.inside[k] && mask.band[k]);
}

TEST(Domain, Rejections) {
  const auto g = GridSpec::square(kBox, 65);
  EXPECT_THROW(build_domain(BoxShape{{Vec2(-2, -2), Vec2(2, 2)}}, g), ConfigError);
  EXPECT_THROW(build_domain(BallShape{Vec2(5, 5), 0.1}, g), ConfigError);
  EXPECT_THROW(build_domain(BallShape{}, GridSpec{Vec2::Zero(), 0.1, 4, 4}), ConfigError);
}

TEST(Domain, AnnulusHasTwoBoundaries) {
  const auto mask = build_domain(AnnulusShape{Vec2::Zero(), 0.4, 1.0}, GridSpec::square(kBox, 129));
  EXPECT_EQ(count_boundary_components(mask), 2);
}

TEST(Solver, IsotropicDisc) {
  const auto mask = build_domain(BallShape{}, GridSpec::square(kBox, 129));
  const auto u = solve_min_time(iso(), mask);
  ASSERT_TRUE(u.converged);
  EXPECT_EQ(u.unreached, 0u);
  const double h = mask.grid.spacing;
  double err = 0;
  for (std::size_t k = 0; k < mask.grid.size(); ++k) {
    if (mask.band[k]) {
      EXPECT_EQ(u.values[k], 0.0);
    }
    if (!mask.inside[k]) continue;
    err = std::max(err, std::abs(u.values[k] - (1.0 - mask.grid.node(k).norm())));
  }
  EXPECT_LE(err, 1.5 * h);
}

TEST(Solver, AnisotropicAgainstBoundaryMinimization) {
  const Mat2 a = (Mat2() << 2, 0, 0, 1).finished();
  const auto m = matrix_model(a, {1, 2, 1, 0.25});
  const auto mask = build_domain(BallShape{}, GridSpec::square(kBox, 129));
  const auto u = solve_min_time(m, mask);
  ASSERT_TRUE(u.converged);
  const Mat2 ainvt = a.inverse().transpose();
  auto metric = [&](const Vec2&, const Vec2& v) { return (ainvt * v).norm(); };
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> pick(0, mask.grid.size() - 1);
  double err = 0;
  int checked = 0;
  while (checked < 200) {
    const std::size_t k = pick(rng);
    if (!mask.inside[k]) continue;
    err = std::max(err, std::abs(u.values[k] - oracle::boundary_min(metric, mask.grid.node(k))));
    ++checked;
  }
  EXPECT_LE(err, 1.5 * mask.grid.spacing);
}

TEST(Solver, SpeedSandwich) {
  const auto m = matrix_model((Mat2() << 2, 0.3, 0, 1).finished(), {0.9, 2.1, 1, 0.25});
  const auto mask = build_domain(BallShape{}, GridSpec::square(kBox, 97));
  const auto u = solve_min_time(m, mask);
  const double h = mask.grid.spacing;
  const auto [smax, smin] = singular_values(m.matrix_field()->base);
  for (std::size_t k = 0; k < mask.grid.size(); ++k) {
    if (!mask.inside[k]) continue;
    const double d = 1.0 - mask.grid.node(k).norm();
    EXPECT_GE(u.values[k], d / smax - h);
    EXPECT_LE(u.values[k], d / smin + h);
  }
}

TEST(Solver, MoreDirectionsNeverRaise) {
  MatrixFieldSpec spec;
  spec.perturbations.push_back({make_power_bump_field(Vec2(0.2, 0.1), 0.4, 0.5), (Mat2() << 1, 0, 0, 0.5).finished()});
  const auto m = make_matrix_field_model(spec, {1, 2, 0.5, 0.25});
  const auto mask = build_domain(BallShape{}, GridSpec::square(kBox, 65));
  SolverParams p;
  p.direction_count = 32;
  auto prev = solve_min_time(m, mask, p);
  for (int n : {64, 128, 256}) {
    p.direction_count = n;
    const auto cur = solve_min_time(m, mask, p);
    for (std::size_t k = 0; k < cur.values.size(); ++k) {
      if (mask.inside[k]) {
        EXPECT_LE(cur.values[k], prev.values[k]);
      }
    }
    prev = cur;
  }
}

TEST(Solver, DeterministicAcrossThreads) {
  const auto m = matrix_model((Mat2() << 1.5, 0.2, 0.1, 1).finished(), {0.9, 2, 1, 0.25});
  const auto mask = build_domain(AnnulusShape{Vec2::Zero(), 0.3, 1.0}, GridSpec::square(kBox, 81));
  SolverParams a, b;
  b.threads = 4;
  EXPECT_EQ(solve_min_time(m, mask, a).values, solve_min_time(m, mask, b).values);
}

TEST(Solver, ModelFailureCarriesNode) {
  // generic H that fails away from the origin
  const auto m = make_generic_model(
      [](const Vec2& x, const Vec2& p) {
        if (x.norm() > 0.5 && x.norm() < 0.6) throw EvaluationError("bad point", x);
        return p.norm();
      },
      {0.5, 2, 1, 0.25}, NumericParams{.partition_count = 90, .domain = {Vec2(-0.2, -0.2), Vec2(0.2, 0.2)}});
  const auto mask = build_domain(BallShape{}, GridSpec::square(kBox, 33));
  try {
    solve_min_time(m, mask);
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    EXPECT_GT(e.point.norm(), 0.45);
    EXPECT_LT(e.point.norm(), 0.65);
  }
}

TEST(LevelSet, CircleWithinTwoSpacings) {
  const auto mask = build_domain(BallShape{}, GridSpec::square(kBox, 129));
  const auto u = solve_min_time(iso(), mask);
  const double h = mask.grid.spacing;
  const auto lines = extract_level_set(u, 0.5);
  ASSERT_FALSE(lines.empty());
  std::vector<Vec2> pts;
  for (const auto& l : lines) pts.insert(pts.end(), l.begin(), l.end());
  for (const auto& p : pts) EXPECT_LE(std::abs(p.norm() - 0.5), 2 * h);
  for (int k = 0; k < 360; ++k) {
    const Vec2 c = 0.5 * unit_vector(2 * kPi * k / 360);
    double best = kInf;
    for (const auto& p : pts) best = std::min(best, (p - c).norm());
    EXPECT_LE(best, 2 * h);
  }
  EXPECT_TRUE(extract_level_set(u, u.max_finite() + 0.1).empty());
  EXPECT_TRUE(extract_level_set(u, -0.1).empty());
}

TEST(Interpolate, OutsideGridIsInfinite) {
  const auto mask = build_domain(BallShape{}, GridSpec::square(kBox, 33));
  const auto u = solve_min_time(iso(), mask);
  EXPECT_TRUE(std::isinf(u.interpolate(Vec2(3, 0))));
  EXPECT_NEAR(u.interpolate(Vec2::Zero()), 1.0, 2 * mask.grid.spacing);
}
