#ifndef HJLAB_TESTS_ORACLES_HPP
#define HJLAB_TESTS_ORACLES_HPP

#include "hjlab/core.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using hjlab::Vec2;

// max over n equally spaced unit theta of <theta, q> / h(theta)
inline double brute_polar(const std::function<double(const Vec2&)>& h, const Vec2& q, int n = 1000000) {
  double best = -1e300;
  for (int k = 0; k < n; ++k) {
    const Vec2 th = hjlab::unit_vector(2.0 * hjlab::kPi * (k + 0.5) / n);
    best = std::max(best, th.dot(q) / h(th));
  }
  return best;
}

inline Vec2 fd_gradient(const std::function<double(const Vec2&)>& f, const Vec2& p, double step = 1e-6) {
  const Vec2 ex(step, 0.0), ey(0.0, step);
  return {(f(p + ex) - f(p - ex)) / (2 * step), (f(p + ey) - f(p - ey)) / (2 * step)};
}

// min over n boundary points y of the unit circle (center c, radius rho) of metric(x, y - x)
inline double boundary_min(const std::function<double(const Vec2&, const Vec2&)>& metric, const Vec2& x,
                           const Vec2& c = Vec2::Zero(), double rho = 1.0, int n = 10000) {
  double best = 1e300;
  for (int k = 0; k < n; ++k) {
    const Vec2 y = c + rho * hjlab::unit_vector(2.0 * hjlab::kPi * k / n);
    best = std::min(best, metric(x, y - x));
  }
  return best;
}

inline Vec2 random_unit(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> a(0.0, 2.0 * hjlab::kPi);
  return hjlab::unit_vector(a(rng));
}

inline Vec2 random_point(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  const double x = u(rng);
  return {x, u(rng)};
}

}  // namespace oracle

#endif
