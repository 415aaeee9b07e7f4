#ifndef HJLAB_TRAJECTORIES_HPP
#define HJLAB_TRAJECTORIES_HPP

#include "hjlab/eikonal_solver.hpp"
#include "hjlab/exponent_fit.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace hjlab {

enum class TraceMode { dpp, gradient };
enum class TerminalStatus { reached_boundary, max_steps, stalled };

std::string to_string(TraceMode mode);
std::string to_string(TerminalStatus status);
TraceMode parse_trace_mode(const std::string& name);

struct TraceParams {
  double dt = 0.05;
  TraceMode mode = TraceMode::dpp;
  /// Speed bound used by the stopping rule; 0 means the model's declared R.
  double speed_upper = 0.0;
  int direction_count = 720;
  int refine_iters = 40;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec2> positions;
  std::vector<Vec2> velocities;  // forward differences, last one repeated
  std::vector<double> values;    // Interp(u) at each position
  TerminalStatus status = TerminalStatus::max_steps;
  double dt = 0.0;

  std::size_t size() const { return positions.size(); }
  double duration() const { return times.empty() ? 0.0 : times.back(); }
};

/// Descends the value field from x0 with unit time per step. Throws
/// DomainError if x0 is outside Omega or sits where u is not finite.
Trajectory trace_optimal(const ValueField& u, const HamiltonianModel& model, const Vec2& x0,
                         const TraceParams& params = {});

/// Lag window [10 dt, T/4] with 8 bins and a 1e-12 noise floor.
FitWindow default_window(const Trajectory& traj);

/// Envelope of |x'(t2) - x'(t1)| against t2 - t1.
ExponentFit velocity_holder_fit(const Trajectory& traj, const FitWindow& window);
/// Envelope of |x((t1+t2)/2) - (x(t1) + x(t2))/2| over even-step lags.
ExponentFit midpoint_defect_fit(const Trajectory& traj, const FitWindow& window);
/// Envelope of |H0(x(t2), x(t2) - x(t1)) - (t2 - t1)|.
ExponentFit chord_metric_defect_fit(const Trajectory& traj, const HamiltonianModel& model, const FitWindow& window);

/// Largest |u(x(t)) - (u(x0) - t)| along the trajectory.
double dpp_defect(const Trajectory& traj);

/// CSV `t,x,y,vx,vy` with 17 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace hjlab

#endif  // HJLAB_TRAJECTORIES_HPP
