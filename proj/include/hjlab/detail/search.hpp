#ifndef HJLAB_DETAIL_SEARCH_HPP
#define HJLAB_DETAIL_SEARCH_HPP

#include <Eigen/Dense>

#include <cmath>
#include <utility>

namespace hjlab::detail {

struct ArgMax {
  double arg;
  double value;
};

/// Golden-section search for the maximum of a unimodal f on [a, b].
/// The returned value is never below max(f(a), f(b), f(midpoint probes)).
template <class F>
ArgMax golden_maximize(F&& f, double a, double b, int iterations) {
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  ArgMax best = fc >= fd ? ArgMax{c, fc} : ArgMax{d, fd};
  for (int it = 0; it < iterations; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
      if (fc > best.value) best = {c, fc};
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
      if (fd > best.value) best = {d, fd};
    }
  }
  return best;
}

/// Compass (coordinate pattern) search maximizing f over R^n starting at x.
/// Step sizes shrink by half whenever no coordinate move improves, down to
/// min_step (relative to the initial step vector).
template <class F, int N>
std::pair<Eigen::Matrix<double, N, 1>, double> compass_maximize(F&& f, Eigen::Matrix<double, N, 1> x,
                                                                Eigen::Matrix<double, N, 1> step,
                                                                double min_step_ratio, int max_evals) {
  double fx = f(x);
  double ratio = 1.0;
  int evals = 1;
  while (ratio > min_step_ratio && evals < max_evals) {
    bool improved = false;
    for (int k = 0; k < x.size() && evals < max_evals; ++k) {
      for (double sign : {1.0, -1.0}) {
        Eigen::Matrix<double, N, 1> trial = x;
        trial[k] += sign * ratio * step[k];
        const double ft = f(trial);
        ++evals;
        if (ft > fx) {
          x = trial;
          fx = ft;
          improved = true;
          break;
        }
      }
    }
    if (!improved) ratio *= 0.5;
  }
  return {x, fx};
}

}  // namespace hjlab::detail

#endif  // HJLAB_DETAIL_SEARCH_HPP
