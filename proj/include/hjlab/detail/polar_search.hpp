#ifndef HJLAB_DETAIL_POLAR_SEARCH_HPP
#define HJLAB_DETAIL_POLAR_SEARCH_HPP

#include "hjlab/core.hpp"
#include "hjlab/detail/search.hpp"

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

namespace hjlab::detail {

struct PolarSearchResult {
  double value = 0.0;  // max_theta <theta, q> / h(theta)
  double angle = 0.0;  // maximizing angle
  Vec2 support = Vec2::Zero();  // theta* / h(theta*), the maximizer on the unit level set of h
  bool tie = false;  // a distant partition direction matched the maximum
};

/// Maximizes <theta, q> / h(theta) over unit theta: scan of the given angles,
/// then golden-section refinement on the bracket around the best one.
/// h must be positive on the unit circle.
template <class H>
PolarSearchResult polar_search(H&& h, const Vec2& q, std::span<const double> angles, int refine_iters) {
  const int m = static_cast<int>(angles.size());
  auto objective = [&](double a) {
    const Vec2 th = unit_vector(a);
    return th.dot(q) / h(th);
  };
  std::vector<double> values(m);
  int best = 0;
  for (int k = 0; k < m; ++k) {
    values[k] = objective(angles[k]);
    if (values[k] > values[best]) best = k;
  }
  PolarSearchResult res;
  res.value = values[best];
  res.angle = angles[best];

  const double step = 2.0 * kPi / m;
  const double tie_tol = 1e-12 * std::max(1.0, std::abs(res.value));
  for (int k = 0; k < m; ++k) {
    const int gap = std::min(std::abs(k - best), m - std::abs(k - best));
    if (gap > 10 && values[k] >= res.value - tie_tol) {
      res.tie = true;
      break;
    }
  }

  if (refine_iters > 0) {
    const auto refined = golden_maximize(objective, res.angle - step, res.angle + step, refine_iters);
    if (refined.value > res.value) {
      res.value = refined.value;
      res.angle = refined.arg;
    }
  }
  const Vec2 th = unit_vector(res.angle);
  res.support = th / h(th);
  return res;
}

/// Minimum and maximum of f over the unit circle (scan + golden refinement).
template <class F>
std::pair<ArgMax, ArgMax> circle_extrema(F&& f, std::span<const double> angles, int refine_iters) {
  const int m = static_cast<int>(angles.size());
  int lo = 0, hi = 0;
  std::vector<double> v(m);
  for (int k = 0; k < m; ++k) {
    v[k] = f(angles[k]);
    if (v[k] < v[lo]) lo = k;
    if (v[k] > v[hi]) hi = k;
  }
  const double step = 2.0 * kPi / m;
  ArgMax mx{angles[hi], v[hi]};
  ArgMax mn{angles[lo], v[lo]};
  if (refine_iters > 0) {
    const auto rmax = golden_maximize(f, mx.arg - step, mx.arg + step, refine_iters);
    if (rmax.value > mx.value) mx = rmax;
    const auto rmin = golden_maximize([&](double a) { return -f(a); }, mn.arg - step, mn.arg + step, refine_iters);
    if (-rmin.value < mn.value) mn = {rmin.arg, -rmin.value};
  }
  return {mn, mx};
}

}  // namespace hjlab::detail

#endif  // HJLAB_DETAIL_POLAR_SEARCH_HPP
