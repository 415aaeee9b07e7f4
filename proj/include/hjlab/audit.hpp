#ifndef HJLAB_AUDIT_HPP
#define HJLAB_AUDIT_HPP

#include "hjlab/hamiltonians.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hjlab {

struct AuditOptions {
  /// Range of |x - y| for the Hoelder sampling and envelope fit.
  double scale_min = 1e-3;
  double scale_max = 1e-1;
  int bins = 10;
  /// Samples per statistic used as starting points of the local sharpening.
  int refine_starts = 3;
  int partition_count = 360;
  int refine_iters = 40;
  int threads = 1;
};

struct AuditSample {
  std::string inequality;
  std::vector<double> sample;
  double residual = 0.0;  // >= 0 iff the inequality held with the declared constants
};

struct AuditReport {
  double r_hat = 0.0;
  double R_hat = 0.0;
  double c0_hat = 0.0;
  std::optional<double> alpha_hat;  // empty when every increment vanished
  double pinch_inner_hat = 0.0;
  double pinch_outer_hat = 0.0;
  /// Worst sample per inequality, checked against the declared constants.
  std::vector<AuditSample> worst_violations;

  /// Upper envelope (scale, max |H(x,p) - H(y,p)|) that alpha_hat was fitted to.
  std::vector<std::pair<double, double>> holder_envelope;
  StandingConstants declared;
  Box domain;
  int sample_count = 0;
  std::uint64_t seed = 0;

  bool declared_constants_hold(double tolerance = 0.0) const;
};

/// Seeded sampling of the standing assumptions over `domain` with local
/// sharpening of every extremal statistic. Deterministic for a given seed,
/// independent of options.threads. Requires sample_count >= 100.
AuditReport audit_standing_assumptions(const HamiltonianModel& model, const Box& domain, int sample_count,
                                       std::uint64_t seed, const AuditOptions& options = {});

}  // namespace hjlab

#endif  // HJLAB_AUDIT_HPP
