#ifndef HJLAB_REGULARITY_PROBE_HPP
#define HJLAB_REGULARITY_PROBE_HPP

#include "hjlab/eikonal_solver.hpp"
#include "hjlab/exponent_fit.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace hjlab {

struct ProbeSpec {
  std::vector<double> radii;
  int point_count = 256;
  int direction_count = 16;
  std::uint64_t seed = 1;
  /// Minimum distance to the boundary for x and x +- h; never below 2 * spacing.
  double interior_margin = 0.0;
  /// Probed before the random points, with the same per-point directions.
  std::vector<Vec2> fixed_points;
  int threads = 1;
};

struct SecondDifferenceProfile {
  std::vector<double> radii;
  std::vector<double> s_values;
  std::vector<Vec2> argmax_x;
  std::vector<Vec2> argmax_dir;
  std::vector<std::size_t> sample_counts;
  std::vector<double> dropped_radii;  // radii with no admissible sample
  ProbeSpec spec;
};

/// u(x + h d) + u(x - h d) - 2 u(x) with bilinear interpolation.
double second_difference(const ValueField& u, const Vec2& x, const Vec2& dir, double h);

/// count radii log-spaced over [lo, hi].
std::vector<double> log_radii(double lo, double hi, int count);

/// Max second difference per radius over seeded (point, direction) samples.
/// Point i is the i-th accepted draw of one stream and its directions come
/// from a stream keyed by (seed, i), so larger counts probe a superset.
/// Throws ConfigError for radii that are not increasing, below 8 * spacing,
/// or above a quarter of the domain diameter.
SecondDifferenceProfile second_difference_profile(const ValueField& u, const ProbeSpec& spec);

inline double semiconcavity_target(double alpha) { return alpha / (4.0 + alpha); }

struct SemiconcavityFit {
  ExponentFit fit;
  double theta_hat = 0.0;     // exponent - 1, +inf when vacuous
  double theta_target = 0.0;  // alpha / (4 + alpha)

  bool vacuous() const { return fit.vacuous(); }
};

/// Log-log fit of s against h over radii in the window with s above its
/// noise floor. All s at or below the floor gives the vacuous sentinel;
/// otherwise fewer than 5 usable radii is a FitError.
SemiconcavityFit fit_semiconcavity_exponent(const SecondDifferenceProfile& profile, const FitWindow& window,
                                            double alpha);

/// Node values f(x) on the mask's grid (synthetic fields for checks).
ValueField sample_field(const DomainMask& mask, const std::function<double(const Vec2&)>& f);

/// CSV `radius,s_value,argmax_x,argmax_y,argmax_dir` (direction as an angle).
void write_profile_csv(std::ostream& out, const SecondDifferenceProfile& profile);

}  // namespace hjlab

#endif  // HJLAB_REGULARITY_PROBE_HPP
