#include "hjlab/trajectories.hpp"

#include "hjlab/detail/search.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace hjlab {

std::string to_string(TraceMode mode) { return mode == TraceMode::dpp ? "dpp" : "gradient"; }

std::string to_string(TerminalStatus status) {
  switch (status) {
    case TerminalStatus::reached_boundary:
      return "reached_boundary";
    case TerminalStatus::max_steps:
      return "max_steps";
    case TerminalStatus::stalled:
      return "stalled";
  }
  return "unknown";
}

TraceMode parse_trace_mode(const std::string& name) {
  if (name == "dpp") return TraceMode::dpp;
  if (name == "gradient") return TraceMode::gradient;
  throw ConfigError(fmt::format("unknown trace mode '{}' (expected dpp or gradient)", name));
}

namespace {

class Tracer {
 public:
  Tracer(const ValueField& u, const HamiltonianModel& model, const TraceParams& p) : u_(u), model_(model), p_(p) {
    dirs_.resize(p.direction_count);
    for (int k = 0; k < p.direction_count; ++k) dirs_[k] = unit_vector(2.0 * kPi * k / p.direction_count);
    polar_.resize(dirs_.size());
  }

  Vec2 step(const Vec2& x) {
    return p_.mode == TraceMode::dpp ? dpp_step(x) : gradient_step(x);
  }

 private:
  Vec2 dpp_step(const Vec2& x) {
    model_.polar_batch(x, dirs_, polar_);
    std::size_t arg = 0;
    double best = kInf;
    for (std::size_t k = 0; k < dirs_.size(); ++k) {
      const double v = u_.interpolate(x + p_.dt / polar_[k] * dirs_[k]);
      if (v < best) {
        best = v;
        arg = k;
      }
    }
    const double da = 2.0 * kPi / static_cast<double>(dirs_.size());
    const double a0 = da * static_cast<double>(arg);
    auto target = [&](double a) {
      const Vec2 e = unit_vector(a);
      return x + p_.dt / model_.polar(x, e) * e;
    };
    const auto r = detail::golden_maximize([&](double a) { return -u_.interpolate(target(a)); }, a0 - da, a0 + da,
                                           p_.refine_iters);
    return -r.value <= best ? target(r.arg) : x + p_.dt / polar_[arg] * dirs_[arg];
  }

  Vec2 gradient_step(const Vec2& x) {
    const double h = u_.grid.spacing;
    const Vec2 du((u_.interpolate(x + Vec2(h, 0)) - u_.interpolate(x - Vec2(h, 0))) / (2 * h),
                  (u_.interpolate(x + Vec2(0, h)) - u_.interpolate(x - Vec2(0, h))) / (2 * h));
    if (!du.allFinite() || du.isZero(0.0)) return x;
    return x + p_.dt * model_.grad_p(x, -du);
  }

  const ValueField& u_;
  const HamiltonianModel& model_;
  TraceParams p_;
  std::vector<Vec2> dirs_;
  std::vector<double> polar_;
};

}  // namespace

Trajectory trace_optimal(const ValueField& u, const HamiltonianModel& model, const Vec2& x0, const TraceParams& params) {
  if (!(params.dt > 0.0)) throw ConfigError(fmt::format("trace dt must be positive, got {}", params.dt));
  if (params.direction_count < 8) throw ConfigError("trace needs at least 8 directions");
  const Vec2 g = (x0 - u.grid.origin) / u.grid.spacing;
  const int ci = static_cast<int>(std::lround(g.x())), cj = static_cast<int>(std::lround(g.y()));
  const double u0 = u.interpolate(x0);
  if (!u.grid.in_range(ci, cj) || !u.mask.inside[u.grid.index(ci, cj)] || !std::isfinite(u0)) {
    throw DomainError(fmt::format("trace start ({}, {}) is not an inside point with finite value", x0.x(), x0.y()));
  }

  const double speed = params.speed_upper > 0.0 ? params.speed_upper : model.constants().R;
  const double stop_below = 2.0 * u.grid.spacing * speed;
  const auto max_steps = static_cast<std::size_t>(std::ceil(4.0 * u0 / params.dt));

  Trajectory traj;
  traj.dt = params.dt;
  traj.positions.push_back(x0);
  traj.values.push_back(u0);
  Tracer tracer(u, model, params);
  int slow = 0;
  while (true) {
    if (traj.values.back() < stop_below) {
      traj.status = TerminalStatus::reached_boundary;
      break;
    }
    if (traj.positions.size() > max_steps) {
      traj.status = TerminalStatus::max_steps;
      break;
    }
    const Vec2 next = tracer.step(traj.positions.back());
    const double v = u.interpolate(next);
    if (!std::isfinite(v) || v >= traj.values.back()) {
      traj.status = TerminalStatus::stalled;
      break;
    }
    slow = traj.values.back() - v < params.dt / 2.0 ? slow + 1 : 0;
    traj.positions.push_back(next);
    traj.values.push_back(v);
    if (slow >= 5) {
      traj.status = TerminalStatus::stalled;
      break;
    }
  }

  const std::size_t n = traj.positions.size();
  traj.times.resize(n);
  traj.velocities.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    traj.times[k] = static_cast<double>(k) * params.dt;
    if (k + 1 < n) traj.velocities[k] = (traj.positions[k + 1] - traj.positions[k]) / params.dt;
  }
  traj.velocities[n - 1] = n > 1 ? traj.velocities[n - 2] : Vec2::Zero();
  return traj;
}

FitWindow default_window(const Trajectory& traj) {
  return {10.0 * traj.dt, traj.duration() / 4.0, 8, 1e-12};
}

namespace {

void require_samples(const Trajectory& traj) {
  if (traj.size() < 100) throw FitError(fmt::format("trajectory has {} samples, fits need at least 100", traj.size()));
}

template <class F>
ExponentFit lag_fit(const Trajectory& traj, const FitWindow& window, int lag_step, F&& value) {
  require_samples(traj);
  const std::size_t n = traj.size();
  std::vector<ScaleSample> samples;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + lag_step; b < n; b += lag_step) {
      const double lag = traj.times[b] - traj.times[a];
      if (lag > window.scale_max) break;
      if (lag >= window.scale_min) samples.push_back({lag, value(a, b)});
    }
  }
  return fit_upper_envelope(samples, window);
}

}  // namespace

ExponentFit velocity_holder_fit(const Trajectory& traj, const FitWindow& window) {
  return lag_fit(traj, window, 1,
                 [&](std::size_t a, std::size_t b) { return (traj.velocities[b] - traj.velocities[a]).norm(); });
}

ExponentFit midpoint_defect_fit(const Trajectory& traj, const FitWindow& window) {
  return lag_fit(traj, window, 2, [&](std::size_t a, std::size_t b) {
    return (traj.positions[(a + b) / 2] - 0.5 * (traj.positions[a] + traj.positions[b])).norm();
  });
}

ExponentFit chord_metric_defect_fit(const Trajectory& traj, const HamiltonianModel& model, const FitWindow& window) {
  return lag_fit(traj, window, 1, [&](std::size_t a, std::size_t b) {
    const Vec2 chord = traj.positions[b] - traj.positions[a];
    return std::abs(model.polar(traj.positions[b], chord) - (traj.times[b] - traj.times[a]));
  });
}

double dpp_defect(const Trajectory& traj) {
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    worst = std::max(worst, std::abs(traj.values[k] - (traj.values[0] - traj.times[k])));
  }
  return worst;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,x,y,vx,vy\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    fmt::print(out, "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", traj.times[k], traj.positions[k].x(),
               traj.positions[k].y(), traj.velocities[k].x(), traj.velocities[k].y());
  }
}

}  // namespace hjlab
