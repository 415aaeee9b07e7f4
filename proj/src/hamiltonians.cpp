#include "hjlab/hamiltonians.hpp"

#include "hjlab/detail/polar_search.hpp"

#include <fmt/format.h>

#include <random>

namespace hjlab {

void StandingConstants::validate() const {
  if (!(r > 0.0 && r < R)) throw ConfigError(fmt::format("standing constants need 0 < r < R (r={}, R={})", r, R));
  if (!(alpha > 0.0 && alpha < 0.5)) throw ConfigError(fmt::format("alpha must lie in (0, 1/2), got {}", alpha));
  if (!(c0 > 0.0)) throw ConfigError(fmt::format("c0 must be positive, got {}", c0));
}

std::string to_string(Provenance p) {
  return p == Provenance::closed_form ? "closed-form" : "numeric-fallback";
}

double evaluate(const ScalarField& field, const Vec2& x) {
  struct Visitor {
    const Vec2& x;
    double operator()(const PowerBump& b) const {
      const double d = (x - b.center).norm();
      return d == 0.0 ? 0.0 : b.amplitude * std::pow(d, b.exponent);
    }
    double operator()(const TrigSum& t) const {
      double s = 0.0;
      for (std::size_t k = 0; k < t.frequencies.size(); ++k) {
        const double phase = k < t.phases.size() ? t.phases[k] : 0.0;
        s += t.amplitudes[k] * std::sin(t.frequencies[k].dot(x) + phase);
      }
      return s;
    }
  };
  return std::visit(Visitor{x}, field);
}

ScalarField make_power_bump_field(Vec2 center, double amplitude, double exponent) {
  if (!(exponent > 0.0 && exponent < 1.0)) {
    throw ConfigError(fmt::format("power bump exponent must lie in (0, 1), got {}", exponent));
  }
  return PowerBump{center, amplitude, exponent};
}

Mat2 MatrixFieldSpec::matrix_at(const Vec2& x) const {
  Mat2 a = base;
  for (const auto& [field, m] : perturbations) a += evaluate(field, x) * m;
  return a;
}

std::pair<double, double> singular_values(const Mat2& a) {
  // Eigenvalues of A^T A in closed form.
  const Mat2 g = a.transpose() * a;
  const double tr = g.trace();
  const double det = std::abs(a.determinant());
  const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det * det));
  const double smax = std::sqrt(0.5 * (tr + disc));
  const double smin = smax > 0.0 ? det / smax : 0.0;
  return {smax, smin};
}

void HamiltonianModel::Backend::polar_batch(const Vec2& x, std::span<const Vec2> dirs,
                                            std::span<double> out) const {
  for (std::size_t k = 0; k < dirs.size(); ++k) out[k] = polar(x, dirs[k]);
}

HamiltonianModel::HamiltonianModel(std::shared_ptr<const Backend> backend, StandingConstants constants,
                                   Provenance provenance, std::shared_ptr<const MatrixFieldSpec> field)
    : backend_(std::move(backend)), constants_(constants), provenance_(provenance), field_(std::move(field)) {}

Vec2 HamiltonianModel::grad_p(const Vec2& x, const Vec2& p) const {
  if (p.isZero(0.0)) throw DomainError("grad_p is undefined at p = 0");
  return backend_->grad_p(x, p);
}

Vec2 HamiltonianModel::polar_grad(const Vec2& x, const Vec2& q) const {
  if (q.isZero(0.0)) throw DomainError("polar_grad is undefined at q = 0");
  return backend_->polar_grad(x, q);
}

HamiltonianModel HamiltonianModel::with_constants(const StandingConstants& constants) const {
  return HamiltonianModel(backend_, constants, provenance_, field_);
}

namespace {

class MatrixFieldBackend final : public HamiltonianModel::Backend {
 public:
  explicit MatrixFieldBackend(std::shared_ptr<const MatrixFieldSpec> spec) : spec_(std::move(spec)) {}

  double eval_h(const Vec2& x, const Vec2& p) const override { return (checked(x) * p).norm(); }

  Vec2 grad_p(const Vec2& x, const Vec2& p) const override {
    const Mat2 a = checked(x);
    const Vec2 ap = a * p;
    return a.transpose() * ap / ap.norm();
  }

  double polar(const Vec2& x, const Vec2& q) const override { return (inverse_transpose(x) * q).norm(); }

  Vec2 polar_grad(const Vec2& x, const Vec2& q) const override {
    const Mat2 ait = inverse_transpose(x);
    const Vec2 w = ait * q;
    return ait.transpose() * w / w.norm();
  }

  void polar_batch(const Vec2& x, std::span<const Vec2> dirs, std::span<double> out) const override {
    const Mat2 ait = inverse_transpose(x);
    for (std::size_t k = 0; k < dirs.size(); ++k) out[k] = (ait * dirs[k]).norm();
  }

 private:
  Mat2 checked(const Vec2& x) const {
    const Mat2 a = spec_->matrix_at(x);
    if (singular_values(a).second < spec_->sigma_floor) {
      throw EvaluationError(fmt::format("A(x) is singular at x = ({}, {})", x.x(), x.y()), x);
    }
    return a;
  }
  Mat2 inverse_transpose(const Vec2& x) const { return checked(x).inverse().transpose(); }

  std::shared_ptr<const MatrixFieldSpec> spec_;
};

class GenericBackend final : public HamiltonianModel::Backend {
 public:
  GenericBackend(HamiltonianFn h, const NumericParams& params) : h_(std::move(h)), params_(params) {
    angles_.resize(params.partition_count);
    for (int k = 0; k < params.partition_count; ++k) angles_[k] = 2.0 * kPi * k / params.partition_count;
  }

  double eval_h(const Vec2& x, const Vec2& p) const override { return h_(x, p); }

  Vec2 grad_p(const Vec2& x, const Vec2& p) const override {
    const double step = params_.fd_step * std::max(1.0, p.norm());
    Vec2 g;
    for (int i = 0; i < 2; ++i) {
      Vec2 e = Vec2::Zero();
      e[i] = step;
      g[i] = (h_(x, p + e) - h_(x, p - e)) / (2.0 * step);
    }
    return g;
  }

  double polar(const Vec2& x, const Vec2& q) const override {
    if (q.isZero(0.0)) return 0.0;
    return search(x, q).value;
  }

  Vec2 polar_grad(const Vec2& x, const Vec2& q) const override {
    const auto res = search(x, q);
    if (res.tie) {
      throw ModelDefect(fmt::format("support point of the unit sublevel set is not unique at x = ({}, {})",
                                    x.x(), x.y()));
    }
    return res.support;
  }

 private:
  detail::PolarSearchResult search(const Vec2& x, const Vec2& q) const {
    return detail::polar_search([&](const Vec2& th) { return h_(x, th); }, q, angles_, params_.refine_iters);
  }

  HamiltonianFn h_;
  NumericParams params_;
  std::vector<double> angles_;
};

void check_power_bump_exponents(const MatrixFieldSpec& spec, const StandingConstants& constants) {
  for (const auto& [field, m] : spec.perturbations) {
    if (const auto* bump = std::get_if<PowerBump>(&field)) {
      if (std::abs(bump->exponent - 2.0 * constants.alpha) > 1e-12) {
        throw ConfigError(fmt::format("power bump exponent {} must equal 2*alpha = {}", bump->exponent,
                                      2.0 * constants.alpha));
      }
    }
  }
}

}  // namespace

HamiltonianModel make_matrix_field_model(const MatrixFieldSpec& spec, const StandingConstants& constants) {
  constants.validate();
  check_power_bump_exponents(spec, constants);

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> ux(spec.domain.lo.x(), spec.domain.hi.x());
  std::uniform_real_distribution<double> uy(spec.domain.lo.y(), spec.domain.hi.y());
  // Corners and centers of bumps are where invertibility is most likely to fail.
  std::vector<Vec2> probes{spec.domain.lo, spec.domain.hi, Vec2(spec.domain.lo.x(), spec.domain.hi.y()),
                           Vec2(spec.domain.hi.x(), spec.domain.lo.y())};
  for (const auto& [field, m] : spec.perturbations) {
    if (const auto* bump = std::get_if<PowerBump>(&field)) probes.push_back(bump->center);
  }
  for (int k = 0; k < spec.invertibility_samples; ++k) probes.emplace_back(ux(rng), uy(rng));
  for (const Vec2& x : probes) {
    const double smin = singular_values(spec.matrix_at(x)).second;
    if (smin < spec.sigma_floor) {
      throw ConfigError(fmt::format("matrix field is not invertible on the working domain: sigma_min = {} at ({}, {})",
                                    smin, x.x(), x.y()));
    }
  }

  auto shared = std::make_shared<const MatrixFieldSpec>(spec);
  return HamiltonianModel(std::make_shared<MatrixFieldBackend>(shared), constants, Provenance::closed_form, shared);
}

HamiltonianModel make_generic_model(HamiltonianFn h, const StandingConstants& constants, const NumericParams& params) {
  constants.validate();
  if (params.partition_count < 8) throw ConfigError("numeric partition needs at least 8 directions");

  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> ux(params.domain.lo.x(), params.domain.hi.x());
  std::uniform_real_distribution<double> uy(params.domain.lo.y(), params.domain.hi.y());
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> log_mag(std::log(0.1), std::log(10.0));
  std::uniform_real_distribution<double> lambda_dist(0.0, 10.0);
  for (int k = 0; k < params.spot_checks; ++k) {
    const Vec2 x(ux(rng), uy(rng));
    const Vec2 p = std::exp(log_mag(rng)) * unit_vector(angle(rng));
    const double lambda = std::max(1e-3, lambda_dist(rng));
    const double hp = h(x, p);
    const double hlp = h(x, lambda * p);
    const double np = p.norm();
    if (std::abs(hlp - lambda * hp) > params.homogeneity_tol * lambda * np * std::max(1.0, hp / np)) {
      throw ConfigError(fmt::format("H is not positively 1-homogeneous at x = ({}, {}): H(lp) = {}, l*H(p) = {}",
                                    x.x(), x.y(), hlp, lambda * hp));
    }
    const double slack = 1e-12 * np;
    if (hp < constants.r * np - slack || hp > constants.R * np + slack) {
      throw ConfigError(fmt::format("H violates the declared growth bounds at x = ({}, {}): H/|p| = {} not in [{}, {}]",
                                    x.x(), x.y(), hp / np, constants.r, constants.R));
    }
  }
  return HamiltonianModel(std::make_shared<GenericBackend>(std::move(h), params), constants,
                          Provenance::numeric_fallback);
}

}  // namespace hjlab
