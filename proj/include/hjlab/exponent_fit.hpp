#ifndef HJLAB_EXPONENT_FIT_HPP
#define HJLAB_EXPONENT_FIT_HPP

#include "hjlab/core.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace hjlab {

/// Scale window and binning for an upper-envelope fit. Values at or below
/// noise_floor count as "no data".
struct FitWindow {
  double scale_min = 0.0;
  double scale_max = 0.0;
  int bins = 8;
  double noise_floor = 0.0;
};

enum class FitStatus {
  fitted,
  vacuous,  // no positive data above the noise floor: the bound holds trivially
};

/// Result of a log-log regression through per-bin maxima.
struct ExponentFit {
  FitStatus status = FitStatus::fitted;
  double exponent = 0.0;  // +inf when vacuous
  double constant = 0.0;  // multiplicative constant exp(intercept)
  double window_min = 0.0;
  double window_max = 0.0;
  std::size_t pair_count = 0;
  double max_positive_residual = 0.0;  // in log units
  std::vector<std::pair<double, double>> envelope;  // (scale, value) points used by the fit

  bool vacuous() const { return status == FitStatus::vacuous; }
};

struct ScaleSample {
  double scale = 0.0;
  double value = 0.0;
};

/// Bins samples logarithmically over the window, takes the per-bin maximum
/// (located at the scale where it occurred) and least-squares fits
/// log(value) = log(constant) + exponent * log(scale).
/// Throws FitError if fewer than min_pairs samples fall in the window or
/// fewer than min_bins bins carry data above the floor (unless none do).
ExponentFit fit_upper_envelope(std::span<const ScaleSample> samples, const FitWindow& window,
                               std::size_t min_pairs = 30, int min_bins = 5);

/// Slope and intercept of the least-squares line through (x, y).
std::pair<double, double> least_squares_line(std::span<const double> x, std::span<const double> y);

}  // namespace hjlab

#endif  // HJLAB_EXPONENT_FIT_HPP
