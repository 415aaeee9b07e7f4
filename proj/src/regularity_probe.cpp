#include "hjlab/regularity_probe.hpp"

#include "hjlab/parallel.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <limits>
#include <ostream>
#include <random>

namespace hjlab {

double second_difference(const ValueField& u, const Vec2& x, const Vec2& dir, double h) {
  return u.interpolate(x + h * dir) + u.interpolate(x - h * dir) - 2.0 * u.interpolate(x);
}

std::vector<double> log_radii(double lo, double hi, int count) {
  if (!(lo > 0.0 && hi > lo) || count < 2) throw ConfigError("log_radii needs 0 < lo < hi and count >= 2");
  std::vector<double> r(count);
  for (int k = 0; k < count; ++k) r[k] = lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1));
  return r;
}

namespace {

double inside_diameter(const DomainMask& mask) {
  Vec2 lo = Vec2::Constant(kInf), hi = Vec2::Constant(-kInf);
  for (std::size_t k = 0; k < mask.grid.size(); ++k) {
    if (!mask.inside[k]) continue;
    lo = lo.cwiseMin(mask.grid.node(k));
    hi = hi.cwiseMax(mask.grid.node(k));
  }
  return (hi - lo).norm();
}

}  // namespace

SecondDifferenceProfile second_difference_profile(const ValueField& u, const ProbeSpec& spec) {
  const GridSpec& g = u.grid;
  if (spec.radii.empty()) throw ConfigError("probe: no radii given");
  if (spec.point_count < 0 || spec.direction_count < 1) throw ConfigError("probe: bad point or direction count");
  const double diameter = inside_diameter(u.mask);
  for (std::size_t k = 0; k < spec.radii.size(); ++k) {
    const double r = spec.radii[k];
    if (k > 0 && !(r > spec.radii[k - 1])) throw ConfigError("probe: radii must be strictly increasing");
    if (r < 8.0 * g.spacing * (1.0 - 1e-12)) {
      throw ConfigError(fmt::format("probe: radius {} is below 8 * spacing = {}", r, 8.0 * g.spacing));
    }
    if (r > 0.25 * diameter) {
      throw ConfigError(fmt::format("probe: radius {} exceeds a quarter of the domain diameter {}", r, diameter));
    }
  }

  const ValueField clearance = distance_to_boundary(u.mask);
  const double margin = std::max(spec.interior_margin, 2.0 * g.spacing);
  auto clear = [&](const Vec2& x) { return clearance.interpolate(x) >= margin; };

  std::vector<Vec2> points(spec.fixed_points);
  {
    std::mt19937_64 rng(spec.seed);
    const Box b = g.bounds();
    std::uniform_real_distribution<double> ux(b.lo.x(), b.hi.x()), uy(b.lo.y(), b.hi.y());
    const std::size_t budget = 1000 * static_cast<std::size_t>(spec.point_count) + 1000;
    int accepted = 0;
    for (std::size_t tries = 0; accepted < spec.point_count && tries < budget; ++tries) {
      const Vec2 x(ux(rng), uy(rng));
      if (clear(x) && std::isfinite(u.interpolate(x))) {
        points.push_back(x);
        ++accepted;
      }
    }
  }

  const std::size_t nr = spec.radii.size();
  struct Best {
    double s = -kInf;
    Vec2 x = Vec2::Zero();
    Vec2 dir = Vec2::Zero();
    std::size_t count = 0;
  };
  std::vector<std::vector<Best>> per_point(points.size(), std::vector<Best>(nr));
  parallel_for(points.size(), spec.threads, [&](std::size_t i) {
    const Vec2& x = points[i];
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> angle(0.0, kPi);
    const double ux = u.interpolate(x);
    for (int d = 0; d < spec.direction_count; ++d) {
      const Vec2 dir = unit_vector(angle(rng));
      for (std::size_t k = 0; k < nr; ++k) {
        const double h = spec.radii[k];
        const Vec2 a = x + h * dir, b = x - h * dir;
        if (!clear(x) || !clear(a) || !clear(b)) continue;
        const double s = u.interpolate(a) + u.interpolate(b) - 2.0 * ux;
        if (!std::isfinite(s)) continue;
        Best& best = per_point[i][k];
        ++best.count;
        if (s > best.s) best = {s, x, dir, best.count};
      }
    }
  });

  SecondDifferenceProfile prof;
  prof.spec = spec;
  for (std::size_t k = 0; k < nr; ++k) {
    Best best;
    for (const auto& pp : per_point) {
      best.count += pp[k].count;
      if (pp[k].count > 0 && pp[k].s > best.s) {
        best.s = pp[k].s;
        best.x = pp[k].x;
        best.dir = pp[k].dir;
      }
    }
    if (best.count == 0) {
      prof.dropped_radii.push_back(spec.radii[k]);
      continue;
    }
    prof.radii.push_back(spec.radii[k]);
    prof.s_values.push_back(best.s);
    prof.argmax_x.push_back(best.x);
    prof.argmax_dir.push_back(best.dir);
    prof.sample_counts.push_back(best.count);
  }
  return prof;
}

SemiconcavityFit fit_semiconcavity_exponent(const SecondDifferenceProfile& profile, const FitWindow& window,
                                            double alpha) {
  SemiconcavityFit out;
  out.theta_target = semiconcavity_target(alpha);
  ExponentFit& fit = out.fit;
  fit.window_min = window.scale_min;
  fit.window_max = window.scale_max;
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < profile.radii.size(); ++k) {
    const double r = profile.radii[k], s = profile.s_values[k];
    if (r < window.scale_min || r > window.scale_max) continue;
    ++fit.pair_count;
    if (s > window.noise_floor && s > 0.0) {
      fit.envelope.emplace_back(r, s);
      lx.push_back(std::log(r));
      ly.push_back(std::log(s));
    }
  }
  if (lx.empty()) {
    fit.status = FitStatus::vacuous;
    fit.exponent = kInf;
    out.theta_hat = kInf;
    return out;
  }
  if (lx.size() < 5) {
    throw FitError(fmt::format("only {} radii with second differences above the floor, need 5", lx.size()));
  }
  const auto [slope, intercept] = least_squares_line(lx, ly);
  fit.exponent = slope;
  fit.constant = std::exp(intercept);
  for (std::size_t i = 0; i < lx.size(); ++i) {
    fit.max_positive_residual = std::max(fit.max_positive_residual, ly[i] - (intercept + slope * lx[i]));
  }
  out.theta_hat = slope - 1.0;
  return out;
}

ValueField sample_field(const DomainMask& mask, const std::function<double(const Vec2&)>& f) {
  ValueField u;
  u.grid = mask.grid;
  u.mask = mask;
  u.values.resize(mask.grid.size());
  for (std::size_t k = 0; k < u.values.size(); ++k) u.values[k] = f(mask.grid.node(k));
  u.converged = true;
  return u;
}

void write_profile_csv(std::ostream& out, const SecondDifferenceProfile& profile) {
  out << "radius,s_value,argmax_x,argmax_y,argmax_dir\n";
  for (std::size_t k = 0; k < profile.radii.size(); ++k) {
    fmt::print(out, "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", profile.radii[k], profile.s_values[k],
               profile.argmax_x[k].x(), profile.argmax_x[k].y(), angle_of(profile.argmax_dir[k]));
  }
}

}  // namespace hjlab
