#include "hjlab/exponent_fit.hpp"

#include "hjlab/core.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace hjlab {

std::pair<double, double> least_squares_line(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxx > 0 ? sxy / sxx : 0.0;
  return {slope, my - slope * mx};
}

ExponentFit fit_upper_envelope(std::span<const ScaleSample> samples, const FitWindow& window,
                               std::size_t min_pairs, int min_bins) {
  if (!(window.scale_min > 0.0 && window.scale_max > window.scale_min)) {
    throw FitError(fmt::format("empty fit window [{}, {}]", window.scale_min, window.scale_max));
  }
  if (window.bins < 1) throw FitError("fit window needs at least one bin");

  ExponentFit fit;
  fit.window_min = window.scale_min;
  fit.window_max = window.scale_max;

  const double lmin = std::log(window.scale_min);
  const double lwidth = (std::log(window.scale_max) - lmin) / window.bins;
  struct Bin {
    double value = -1.0;
    double scale = 0.0;
  };
  std::vector<Bin> bins(window.bins);
  for (const auto& s : samples) {
    if (s.scale < window.scale_min || s.scale > window.scale_max) continue;
    ++fit.pair_count;
    const int b = std::clamp(static_cast<int>((std::log(s.scale) - lmin) / lwidth), 0, window.bins - 1);
    if (s.value > bins[b].value) bins[b] = {s.value, s.scale};
  }
  if (fit.pair_count < min_pairs) {
    throw FitError(fmt::format("only {} samples in window [{}, {}], need {}", fit.pair_count, window.scale_min,
                               window.scale_max, min_pairs));
  }

  std::vector<double> lx, ly;
  for (const auto& b : bins) {
    if (b.value > window.noise_floor && b.value > 0.0) {
      fit.envelope.emplace_back(b.scale, b.value);
      lx.push_back(std::log(b.scale));
      ly.push_back(std::log(b.value));
    }
  }
  if (lx.empty()) {
    fit.status = FitStatus::vacuous;
    fit.exponent = std::numeric_limits<double>::infinity();
    return fit;
  }
  if (static_cast<int>(lx.size()) < min_bins) {
    throw FitError(fmt::format("only {} bins above the noise floor, need {}", lx.size(), min_bins));
  }
  const auto [slope, intercept] = least_squares_line(lx, ly);
  fit.exponent = slope;
  fit.constant = std::exp(intercept);
  for (std::size_t i = 0; i < lx.size(); ++i) {
    fit.max_positive_residual = std::max(fit.max_positive_residual, ly[i] - (intercept + slope * lx[i]));
  }
  return fit;
}

}  // namespace hjlab
