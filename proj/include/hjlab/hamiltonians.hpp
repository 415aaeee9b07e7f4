#ifndef HJLAB_HAMILTONIANS_HPP
#define HJLAB_HAMILTONIANS_HPP

#include "hjlab/core.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace hjlab {

/// Constants of the standing assumptions: speed bounds r < R, Hoelder
/// seminorm c0 of x -> H(x,p)/|p| and half-exponent alpha in (0, 1/2).
struct StandingConstants {
  double r = 1.0;
  double R = 2.0;
  double c0 = 1.0;
  double alpha = 0.25;

  /// Throws ConfigError when an invariant is broken.
  void validate() const;
};

enum class Provenance { closed_form, numeric_fallback };

std::string to_string(Provenance p);

// ---------------------------------------------------------------------------
// Scalar coefficient fields

/// amplitude * |x - center|^exponent. Exactly exponent-Hoelder with seminorm
/// |amplitude|, and no better at the center.
struct PowerBump {
  Vec2 center = Vec2::Zero();
  double amplitude = 0.0;
  double exponent = 0.5;
};

/// sum_k amplitudes[k] * sin(<frequencies[k], x> + phases[k]); smooth.
/// Missing phases default to zero.
struct TrigSum {
  std::vector<Vec2> frequencies;
  std::vector<double> amplitudes;
  std::vector<double> phases;
};

using ScalarField = std::variant<PowerBump, TrigSum>;

double evaluate(const ScalarField& field, const Vec2& x);

/// Throws ConfigError unless exponent is in (0, 1).
ScalarField make_power_bump_field(Vec2 center, double amplitude, double exponent);

// ---------------------------------------------------------------------------
// Matrix fields A(x) = base + sum_i f_i(x) M_i

struct MatrixFieldSpec {
  Mat2 base = Mat2::Identity();
  std::vector<std::pair<ScalarField, Mat2>> perturbations;
  /// Working domain on which invertibility is checked.
  Box domain{Vec2(-1.2, -1.2), Vec2(1.2, 1.2)};
  double sigma_floor = 1e-6;
  int invertibility_samples = 4096;
  std::uint64_t seed = 0x5eed;

  Mat2 matrix_at(const Vec2& x) const;
};

/// Singular values (largest first) of a 2x2 matrix.
std::pair<double, double> singular_values(const Mat2& a);

// ---------------------------------------------------------------------------

/// Tuning for numeric-fallback models. The finite-difference gradient uses
/// central differences with step fd_step * max(1, |p|).
struct NumericParams {
  int partition_count = 720;
  int refine_iters = 40;
  double fd_step = 1e-6;
  /// Box used for the homogeneity / growth spot checks at construction.
  Box domain{Vec2(-1.2, -1.2), Vec2(1.2, 1.2)};
  int spot_checks = 256;
  std::uint64_t seed = 0x5eed;
  double homogeneity_tol = 1e-10;
};

/// Immutable bundle (H, D_pH, H0, D_qH0) plus its standing constants.
/// Cheap to copy; all evaluations are pure and thread-safe.
class HamiltonianModel {
 public:
  class Backend {
   public:
    virtual ~Backend() = default;
    virtual double eval_h(const Vec2& x, const Vec2& p) const = 0;
    virtual Vec2 grad_p(const Vec2& x, const Vec2& p) const = 0;
    virtual double polar(const Vec2& x, const Vec2& q) const = 0;
    virtual Vec2 polar_grad(const Vec2& x, const Vec2& q) const = 0;
    /// out[k] = polar(x, dirs[k]); backends may freeze per-x work.
    virtual void polar_batch(const Vec2& x, std::span<const Vec2> dirs, std::span<double> out) const;
  };

  HamiltonianModel(std::shared_ptr<const Backend> backend, StandingConstants constants,
                   Provenance provenance, std::shared_ptr<const MatrixFieldSpec> field = nullptr);

  double eval_h(const Vec2& x, const Vec2& p) const { return backend_->eval_h(x, p); }
  /// Throws DomainError at p = 0.
  Vec2 grad_p(const Vec2& x, const Vec2& p) const;
  double polar(const Vec2& x, const Vec2& q) const { return backend_->polar(x, q); }
  /// Throws DomainError at q = 0.
  Vec2 polar_grad(const Vec2& x, const Vec2& q) const;
  void polar_batch(const Vec2& x, std::span<const Vec2> dirs, std::span<double> out) const {
    backend_->polar_batch(x, dirs, out);
  }

  const StandingConstants& constants() const { return constants_; }
  Provenance provenance() const { return provenance_; }
  /// The generating matrix field for closed-form models, null otherwise.
  const MatrixFieldSpec* matrix_field() const { return field_.get(); }

  /// Same maps, different declared constants.
  HamiltonianModel with_constants(const StandingConstants& constants) const;

 private:
  std::shared_ptr<const Backend> backend_;
  StandingConstants constants_;
  Provenance provenance_;
  std::shared_ptr<const MatrixFieldSpec> field_;
};

using HamiltonianFn = std::function<double(const Vec2& x, const Vec2& p)>;

/// H(x,p) = |A(x) p| with closed-form gradient and polar.
/// Throws ConfigError if A is not uniformly invertible on spec.domain or if a
/// power-bump exponent differs from 2 * constants.alpha.
HamiltonianModel make_matrix_field_model(const MatrixFieldSpec& spec, const StandingConstants& constants);

/// Wraps an arbitrary convex, 1-homogeneous H. grad_p uses central
/// differences; polar and polar_grad use the sphere-partition maximization.
/// Throws ConfigError when the spot checks find non-homogeneity or growth
/// outside [r|p|, R|p|].
HamiltonianModel make_generic_model(HamiltonianFn h, const StandingConstants& constants,
                                    const NumericParams& params = {});

}  // namespace hjlab

#endif  // HJLAB_HAMILTONIANS_HPP
