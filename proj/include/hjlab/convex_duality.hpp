#ifndef HJLAB_CONVEX_DUALITY_HPP
#define HJLAB_CONVEX_DUALITY_HPP

#include "hjlab/audit.hpp"
#include "hjlab/hamiltonians.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace hjlab {

/// Deterministic discretization of the unit circle: count equally spaced
/// angles 2*pi*k/count, k = 0..count-1.
struct SpherePartition {
  int level = -1;  // -1 for partitions built from an explicit count
  std::vector<double> angles;
  std::vector<Vec2> directions;

  std::size_t size() const { return angles.size(); }
  double resolution() const { return 2.0 * kPi / static_cast<double>(angles.size()); }

  /// 45 * 2^level directions; level 4 gives the default 720.
  static SpherePartition from_level(int level);
  static SpherePartition with_count(int count);
};

inline constexpr int kDefaultRefineIters = 40;
const SpherePartition& default_partition();

/// One evaluated inequality lhs <= rhs; margin = rhs - lhs.
struct LemmaResidual {
  std::string lemma_id;
  std::size_t sample_index = 0;
  std::vector<double> sample;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;

  static LemmaResidual make(std::string id, std::vector<double> sample, double lhs, double rhs);
};

/// Constants fed to the inequality checkers. Each checker uses the pair its
/// inequality is stated with: growth bounds for the sandwich on H0 and the
/// Hoelder bound of H0, curvature (rolling-ball) radii for the support-point
/// inequalities.
struct LemmaConstants {
  double r_growth = 1.0;
  double R_growth = 1.0;
  double r_pinch = 1.0;
  double R_pinch = 1.0;
  double c0 = 0.0;
  double alpha = 0.25;
};

LemmaConstants audited_constants(const AuditReport& report);
LemmaConstants declared_constants(const StandingConstants& constants);

// ---------------------------------------------------------------------------
// Numeric duality

/// H0(x,q) = max over unit theta of <theta, q> / H(x, theta), refined by
/// golden-section steps around the best partition direction. Never below the
/// partition maximum. Throws DomainError for q = 0.
double polar_eval_numeric(const HamiltonianModel& model, const Vec2& x, const Vec2& q,
                          const SpherePartition& partition = default_partition(),
                          int refine_iters = kDefaultRefineIters);

/// Maximizer p* = theta* / H(x, theta*) of the polar program (the gradient of
/// H0(x, .) at q). Throws DomainError for q = 0, ModelDefect when a distant
/// partition direction ties the maximum (flat piece on the unit sublevel set).
Vec2 polar_grad_numeric(const HamiltonianModel& model, const Vec2& x, const Vec2& q,
                        const SpherePartition& partition = default_partition(),
                        int refine_iters = kDefaultRefineIters);

/// Wraps the numeric polar of `model` as a numeric-fallback model; the
/// declared constants become (1/R, 1/r).
HamiltonianModel make_polar_model(const HamiltonianModel& model, const NumericParams& params = {});

// ---------------------------------------------------------------------------
// Inequality checkers

/// [0]: |<f_p, p> - H(x,p)| <= 0 (Euler identity);
/// [1]: max over partition directions theta of <f_theta, p> <= H(x,p).
std::array<LemmaResidual, 2> check_support_identity(const HamiltonianModel& model, const Vec2& x, const Vec2& p,
                                                    const SpherePartition& partition = default_partition());

/// |f_p(x) - f_p(y)| <= (c0 + sqrt(2 c0 R)) |x - y|^alpha.
LemmaResidual check_f_holder(const HamiltonianModel& model, const Vec2& x, const Vec2& y, const Vec2& p,
                             const LemmaConstants& c);

/// [0]: |f_p - f_q| / R <= |p/|p| - q/|q||;  [1]: |p/|p| - q/|q|| <= |f_p - f_q| / r.
std::array<LemmaResidual, 2> check_direction_sandwich(const HamiltonianModel& model, const Vec2& x, const Vec2& p,
                                                      const Vec2& q, const LemmaConstants& c);

/// With v = f_q and n = p/|p|:
/// [0]: -|v - f_p|^2 / (2r) <= <v - f_p, n>;  [1]: <v - f_p, n> <= -|v - f_p|^2 / (2R).
std::array<LemmaResidual, 2> check_curvature_pinching(const HamiltonianModel& model, const Vec2& x, const Vec2& p,
                                                      const Vec2& q, const LemmaConstants& c);

/// [0]: |q|/R <= H0(x,q);  [1]: H0(x,q) <= |q|/r;
/// [2]: |H0(x,q) - H0(y,q)| <= c0 / r^2 |q| |x - y|^(2 alpha).
std::array<LemmaResidual, 3> check_polar_growth_and_holder(const HamiltonianModel& model, const Vec2& x,
                                                           const Vec2& y, const Vec2& q, const LemmaConstants& c);

enum class DualityRoute {
  model_maps,     // the model's own polar_grad (closed form when available)
  numeric_polar,  // polar_grad_numeric with the given partition
};

/// Normalizes p onto the unit sublevel set, maps it to q = grad_p and back
/// through the polar gradient; lhs = |roundtrip - p_hat|, rhs = 0.
LemmaResidual check_gradient_duality(const HamiltonianModel& model, const Vec2& x, const Vec2& p,
                                     const SpherePartition& partition = default_partition(),
                                     int refine_iters = kDefaultRefineIters,
                                     DualityRoute route = DualityRoute::model_maps);

/// Sup over seeded pairs of |D_qH0(x,q) - D_qH0(x,q')| (|q| v |q'|) / |q - q'|.
double estimate_polar_grad_lipschitz(const HamiltonianModel& model, const Vec2& x, int sample_count,
                                     std::uint64_t seed);

/// Largest radius of curvature of the unit sublevel set of H(x, .), i.e. the
/// sharp radius R' with <p' - p, f_p/|f_p|> <= -|p' - p|^2 / (2R') on it.
double polar_rolling_radius(const HamiltonianModel& model, const Vec2& x,
                            const SpherePartition& partition = default_partition());

/// <p' - p, f_p/|f_p|> + |p' - p|^2/(2 R') <= 0 for p, p' on the unit
/// sublevel set in directions theta, theta'.
LemmaResidual check_polar_lower_curvature(const HamiltonianModel& model, const Vec2& x, double theta,
                                          double theta_prime, double radius);

// ---------------------------------------------------------------------------
// Batches

struct LemmaSuiteSpec {
  Box domain{Vec2(-1.0, -1.0), Vec2(1.0, 1.0)};
  int samples_per_lemma = 1000;
  std::uint64_t seed = 1;
  /// |x - y| is drawn log-uniformly in this range (match the audit's).
  double scale_min = 1e-3;
  double scale_max = 1e-1;
  int threads = 1;
  bool include_gradient_duality = true;
};

/// Seeded samples of every checker. Rows are ordered by checker, then sample.
std::vector<LemmaResidual> run_lemma_suite(const HamiltonianModel& model, const LemmaConstants& constants,
                                           const LemmaSuiteSpec& spec);

double min_margin(std::span<const LemmaResidual> rows);

/// CSV `lemma_id,sample_index,lhs,rhs,margin` with 17 significant digits.
void write_residuals_csv(std::ostream& out, std::span<const LemmaResidual> rows);

}  // namespace hjlab

#endif  // HJLAB_CONVEX_DUALITY_HPP
