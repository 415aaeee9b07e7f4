#include "hjlab/trajectories.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace hjlab;

namespace {

const Box kBox{Vec2(-1.2, -1.2), Vec2(1.2, 1.2)};

HamiltonianModel matrix_model(const Mat2& a, StandingConstants k) {
  MatrixFieldSpec spec;
  spec.base = a;
  return make_matrix_field_model(spec, k);
}

struct Fixture {
  HamiltonianModel model;
  DomainMask mask;
  ValueField u;
};

const Fixture& iso_disc() {
  static const Fixture f = [] {
    auto m = matrix_model(Mat2::Identity(), {0.5, 2, 1, 0.25});
    auto mask = build_domain(BallShape{}, GridSpec::square(kBox, 129));
    auto u = solve_min_time(m, mask);
    return Fixture{m, mask, u};
  }();
  return f;
}

Trajectory line(int n, double dt, const Vec2& v) {
  Trajectory t;
  t.dt = dt;
  for (int k = 0; k < n; ++k) {
    t.times.push_back(k * dt);
    t.positions.push_back(k * dt * v);
    t.velocities.push_back(v);
    t.values.push_back(1.0 - k * dt);
  }
  return t;
}

}  // namespace

TEST(Trace, RadialInDisc) {
  const auto& f = iso_disc();
  const double h = f.mask.grid.spacing;
  TraceParams p;
  p.dt = 2 * h / 0.5;
  for (auto mode : {TraceMode::dpp, TraceMode::gradient}) {
    p.mode = mode;
    const auto t = trace_optimal(f.u, f.model, Vec2(0.3, 0), p);
    EXPECT_EQ(t.status, TerminalStatus::reached_boundary) << to_string(mode);
    ASSERT_GT(t.size(), 5u);
    // value error O(h) only pins the path to O(sqrt(h)); the gradient path stays on the axis
    const double lateral = mode == TraceMode::gradient ? 2 * h : std::sqrt(h);
    for (const auto& x : t.positions) EXPECT_LE(std::abs(x.y()), lateral);
    for (std::size_t k = 1; k < t.size(); ++k) EXPECT_GT(t.positions[k].x(), t.positions[k - 1].x());
    EXPECT_LE(dpp_defect(t), 2 * h);
  }
}

TEST(Trace, StraightInConstantMetric) {
  const Mat2 a = (Mat2() << 2, 0, 0, 1).finished();
  const auto m = matrix_model(a, {1, 2, 1, 0.25});
  const auto mask = build_domain(BoxShape{{Vec2(-1, -1), Vec2(1, 1)}}, GridSpec::square(kBox, 121));
  const auto u = solve_min_time(m, mask);
  TraceParams p;
  p.dt = 2 * mask.grid.spacing;
  const auto t = trace_optimal(u, m, Vec2(0.1, 0.5), p);
  ASSERT_GT(t.size(), 3u);
  // straight segment: every velocity equals the first
  for (std::size_t k = 0; k + 1 < t.size(); ++k) EXPECT_LE((t.velocities[k] - t.velocities[0]).norm(), 1e-6);
  // unit time per step in the metric
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    EXPECT_NEAR(m.polar(t.positions[k], t.positions[k + 1] - t.positions[k]), p.dt, 1e-9);
  }
}

TEST(Trace, StartOutsideRejected) {
  const auto& f = iso_disc();
  EXPECT_THROW(trace_optimal(f.u, f.model, Vec2(1.1, 0)), DomainError);
  EXPECT_THROW(trace_optimal(f.u, f.model, Vec2(5, 0)), DomainError);
}

TEST(Fits, StraightLineIsVacuousOrFlat) {
  const auto t = line(400, 0.01, Vec2(0.6, 0.8));
  const auto w = default_window(t);
  EXPECT_DOUBLE_EQ(w.scale_min, 0.1);
  EXPECT_DOUBLE_EQ(w.scale_max, t.duration() / 4);
  const auto v = velocity_holder_fit(t, w);
  EXPECT_TRUE(v.vacuous());
  const auto mid = midpoint_defect_fit(t, w);
  EXPECT_TRUE(mid.vacuous() || mid.envelope.empty());
  for (const auto& [s, val] : mid.envelope) EXPECT_LE(val, 1e-12);
  const auto iso = matrix_model(Mat2::Identity(), {0.5, 2, 1, 0.25});
  EXPECT_TRUE(chord_metric_defect_fit(t, iso, w).vacuous());
}

TEST(Fits, KnownHolderExponent) {
  // x'(t) = (cos g(t), sin g(t)) with g(t) = |t - 1|^0.6: velocity exponent 0.6, midpoint defect exponent 1.6
  Trajectory t;
  t.dt = 0.002;
  Vec2 x = Vec2::Zero();
  for (int k = 0; k < 1000; ++k) {
    const double s = k * t.dt;
    const Vec2 v = unit_vector(std::pow(std::abs(s - 1.0), 0.6));
    t.times.push_back(s);
    t.positions.push_back(x);
    t.velocities.push_back(v);
    t.values.push_back(0.0);
    x += t.dt * v;
  }
  const auto w = default_window(t);
  EXPECT_NEAR(velocity_holder_fit(t, w).exponent, 0.6, 0.08);
}

TEST(Fits, TooShort) {
  const auto t = line(60, 0.01, Vec2(1, 0));
  EXPECT_THROW(velocity_holder_fit(t, default_window(t)), FitError);
}

TEST(Trace, CsvShape) {
  std::ostringstream out;
  write_trajectory_csv(out, line(3, 0.5, Vec2(1, 0)));
  EXPECT_EQ(out.str(), "t,x,y,vx,vy\n0,0,0,1,0\n0.5,0.5,0,1,0\n1,1,0,1,0\n");
}

TEST(Trace, ModeNames) {
  EXPECT_EQ(parse_trace_mode("gradient"), TraceMode::gradient);
  EXPECT_EQ(to_string(TerminalStatus::reached_boundary), "reached_boundary");
  EXPECT_THROW(parse_trace_mode("newton"), ConfigError);
}
