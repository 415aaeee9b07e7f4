#include "hjlab/convex_duality.hpp"

#include "hjlab/detail/polar_search.hpp"
#include "hjlab/parallel.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <limits>
#include <ostream>
#include <random>

namespace hjlab {

SpherePartition SpherePartition::with_count(int count) {
  if (count < 4) throw ConfigError(fmt::format("sphere partition needs at least 4 directions, got {}", count));
  SpherePartition part;
  part.angles.resize(count);
  part.directions.resize(count);
  for (int k = 0; k < count; ++k) {
    part.angles[k] = 2.0 * kPi * k / count;
    part.directions[k] = unit_vector(part.angles[k]);
  }
  return part;
}

SpherePartition SpherePartition::from_level(int level) {
  if (level < 0 || level > 16) throw ConfigError(fmt::format("partition level {} out of range [0, 16]", level));
  SpherePartition part = with_count(45 << level);
  part.level = level;
  return part;
}

const SpherePartition& default_partition() {
  static const SpherePartition part = SpherePartition::from_level(4);
  return part;
}

LemmaResidual LemmaResidual::make(std::string id, std::vector<double> sample, double lhs, double rhs) {
  LemmaResidual r;
  r.lemma_id = std::move(id);
  r.sample = std::move(sample);
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = rhs - lhs;
  return r;
}

LemmaConstants audited_constants(const AuditReport& report) {
  LemmaConstants c;
  c.r_growth = report.r_hat;
  c.R_growth = report.R_hat;
  c.r_pinch = report.pinch_inner_hat;
  c.R_pinch = report.pinch_outer_hat;
  c.c0 = report.c0_hat;
  c.alpha = report.declared.alpha;
  return c;
}

LemmaConstants declared_constants(const StandingConstants& k) {
  return {k.r, k.R, k.r, k.R, k.c0, k.alpha};
}

namespace {

detail::PolarSearchResult search(const HamiltonianModel& model, const Vec2& x, const Vec2& q,
                                 const SpherePartition& partition, int refine_iters) {
  if (q.isZero(0.0)) throw DomainError("the polar program is undefined at q = 0");
  return detail::polar_search([&](const Vec2& th) { return model.eval_h(x, th); }, q, partition.angles,
                              refine_iters);
}

std::vector<double> pack(std::initializer_list<Vec2> vs) {
  std::vector<double> out;
  for (const auto& v : vs) {
    out.push_back(v.x());
    out.push_back(v.y());
  }
  return out;
}

}  // namespace

double polar_eval_numeric(const HamiltonianModel& model, const Vec2& x, const Vec2& q,
                          const SpherePartition& partition, int refine_iters) {
  return search(model, x, q, partition, refine_iters).value;
}

Vec2 polar_grad_numeric(const HamiltonianModel& model, const Vec2& x, const Vec2& q,
                        const SpherePartition& partition, int refine_iters) {
  const auto res = search(model, x, q, partition, refine_iters);
  if (res.tie) {
    throw ModelDefect(fmt::format("argmax of the polar program is not unique at x = ({}, {}), q = ({}, {})", x.x(),
                                  x.y(), q.x(), q.y()));
  }
  return res.support;
}

HamiltonianModel make_polar_model(const HamiltonianModel& model, const NumericParams& params) {
  const auto& k = model.constants();
  StandingConstants dual{1.0 / k.R, 1.0 / k.r, k.c0 / (k.r * k.r), k.alpha};
  auto part = std::make_shared<const SpherePartition>(SpherePartition::with_count(params.partition_count));
  const int iters = params.refine_iters;
  HamiltonianFn h = [model, part, iters](const Vec2& x, const Vec2& q) {
    return q.isZero(0.0) ? 0.0 : polar_eval_numeric(model, x, q, *part, iters);
  };
  return make_generic_model(std::move(h), dual, params);
}

std::array<LemmaResidual, 2> check_support_identity(const HamiltonianModel& model, const Vec2& x, const Vec2& p,
                                                    const SpherePartition& partition) {
  const double h = model.eval_h(x, p);
  const Vec2 fp = model.grad_p(x, p);
  double best = -std::numeric_limits<double>::infinity();
  for (const Vec2& th : partition.directions) best = std::max(best, model.grad_p(x, th).dot(p));
  const auto s = pack({x, p});
  return {LemmaResidual::make("euler_identity", s, std::abs(fp.dot(p) - h), 0.0),
          LemmaResidual::make("support_max", s, best, h)};
}

LemmaResidual check_f_holder(const HamiltonianModel& model, const Vec2& x, const Vec2& y, const Vec2& p,
                             const LemmaConstants& c) {
  const double lhs = (model.grad_p(x, p) - model.grad_p(y, p)).norm();
  const double rhs = (c.c0 + std::sqrt(2.0 * c.c0 * c.R_pinch)) * std::pow((x - y).norm(), c.alpha);
  return LemmaResidual::make("fp_holder", pack({x, y, p}), lhs, rhs);
}

std::array<LemmaResidual, 2> check_direction_sandwich(const HamiltonianModel& model, const Vec2& x, const Vec2& p,
                                                      const Vec2& q, const LemmaConstants& c) {
  const double df = (model.grad_p(x, p) - model.grad_p(x, q)).norm();
  const double dn = (p.normalized() - q.normalized()).norm();
  const auto s = pack({x, p, q});
  return {LemmaResidual::make("direction_sandwich_lower", s, df / c.R_pinch, dn),
          LemmaResidual::make("direction_sandwich_upper", s, dn, df / c.r_pinch)};
}

std::array<LemmaResidual, 2> check_curvature_pinching(const HamiltonianModel& model, const Vec2& x, const Vec2& p,
                                                      const Vec2& q, const LemmaConstants& c) {
  const Vec2 d = model.grad_p(x, q) - model.grad_p(x, p);
  const double inner = d.dot(p.normalized());
  const double sq = d.squaredNorm();
  const auto s = pack({x, p, q});
  return {LemmaResidual::make("pinch_inner", s, -sq / (2.0 * c.r_pinch), inner),
          LemmaResidual::make("pinch_outer", s, inner, -sq / (2.0 * c.R_pinch))};
}

std::array<LemmaResidual, 3> check_polar_growth_and_holder(const HamiltonianModel& model, const Vec2& x,
                                                           const Vec2& y, const Vec2& q, const LemmaConstants& c) {
  const double hx = model.polar(x, q);
  const double hy = model.polar(y, q);
  const double nq = q.norm();
  const auto s = pack({x, y, q});
  const double holder_rhs = c.c0 / (c.r_growth * c.r_growth) * nq * std::pow((x - y).norm(), 2.0 * c.alpha);
  return {LemmaResidual::make("polar_growth_lower", s, nq / c.R_growth, hx),
          LemmaResidual::make("polar_growth_upper", s, hx, nq / c.r_growth),
          LemmaResidual::make("polar_holder", s, std::abs(hx - hy), holder_rhs)};
}

LemmaResidual check_gradient_duality(const HamiltonianModel& model, const Vec2& x, const Vec2& p,
                                     const SpherePartition& partition, int refine_iters, DualityRoute route) {
  const Vec2 p_hat = p / model.eval_h(x, p);
  const Vec2 q = model.grad_p(x, p_hat);
  const Vec2 back = route == DualityRoute::model_maps ? model.polar_grad(x, q)
                                                      : polar_grad_numeric(model, x, q, partition, refine_iters);
  return LemmaResidual::make("gradient_duality", pack({x, p}), (back - p_hat).norm(), 0.0);
}

double estimate_polar_grad_lipschitz(const HamiltonianModel& model, const Vec2& x, int sample_count,
                                     std::uint64_t seed) {
  if (sample_count < 100) throw ConfigError(fmt::format("need at least 100 samples, got {}", sample_count));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> log_mag(std::log(0.5), std::log(2.0));
  std::uniform_real_distribution<double> log_rel(std::log(1e-3), std::log(2.0));
  double sup = 0.0;
  for (int k = 0; k < sample_count; ++k) {
    const Vec2 q = std::exp(log_mag(rng)) * unit_vector(angle(rng));
    const Vec2 qp = q + std::exp(log_rel(rng)) * q.norm() * unit_vector(angle(rng));
    const double dq = (q - qp).norm();
    if (qp.norm() < 1e-9 * q.norm() || dq == 0.0) continue;
    const double num = (model.polar_grad(x, q) - model.polar_grad(x, qp)).norm();
    sup = std::max(sup, num * std::max(q.norm(), qp.norm()) / dq);
  }
  return sup;
}

double polar_rolling_radius(const HamiltonianModel& model, const Vec2& x, const SpherePartition& partition) {
  const double d = model.provenance() == Provenance::closed_form ? 1e-5 : 1e-3;
  auto radius = [&](double a) {
    const Vec2 gp = model.polar_grad(x, unit_vector(a + d));
    const Vec2 gm = model.polar_grad(x, unit_vector(a - d));
    return (gp - gm).norm() / (2.0 * std::sin(d));
  };
  return detail::circle_extrema(radius, partition.angles, kDefaultRefineIters).second.value;
}

LemmaResidual check_polar_lower_curvature(const HamiltonianModel& model, const Vec2& x, double theta,
                                          double theta_prime, double radius) {
  const Vec2 e = unit_vector(theta);
  const Vec2 ep = unit_vector(theta_prime);
  const Vec2 p = e / model.eval_h(x, e);
  const Vec2 pp = ep / model.eval_h(x, ep);
  const Vec2 n = model.grad_p(x, p).normalized();
  const double lhs = (pp - p).dot(n) + (pp - p).squaredNorm() / (2.0 * radius);
  return LemmaResidual::make("polar_lower_curvature", pack({x, p, pp}), lhs, 0.0);
}

std::vector<LemmaResidual> run_lemma_suite(const HamiltonianModel& model, const LemmaConstants& constants,
                                           const LemmaSuiteSpec& spec) {
  struct Draw {
    Vec2 x, y, p, q;
  };
  const Box& box = spec.domain;
  auto draws = [&](std::uint64_t stream) {
    std::mt19937_64 rng(spec.seed * 0x9E3779B97F4A7C15ULL + stream);
    std::uniform_real_distribution<double> ux(box.lo.x(), box.hi.x());
    std::uniform_real_distribution<double> uy(box.lo.y(), box.hi.y());
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    std::uniform_real_distribution<double> log_scale(std::log(spec.scale_min), std::log(spec.scale_max));
    std::uniform_real_distribution<double> log_mag(std::log(0.25), std::log(4.0));
    std::vector<Draw> out(spec.samples_per_lemma);
    for (auto& d : out) {
      d.x = Vec2(ux(rng), uy(rng));
      const Vec2 dir = unit_vector(angle(rng));
      const double len = std::exp(log_scale(rng));
      d.y = d.x + len * dir;
      if (!box.contains(d.y)) d.y = d.x - len * dir;
      d.p = std::exp(log_mag(rng)) * unit_vector(angle(rng));
      d.q = std::exp(log_mag(rng)) * unit_vector(angle(rng));
    }
    return out;
  };

  using Checker = std::function<std::vector<LemmaResidual>(const Draw&)>;
  std::vector<Checker> checkers{
      [&](const Draw& d) {
        auto r = check_support_identity(model, d.x, d.p, default_partition());
        return std::vector<LemmaResidual>(r.begin(), r.end());
      },
      [&](const Draw& d) { return std::vector<LemmaResidual>{check_f_holder(model, d.x, d.y, d.p, constants)}; },
      [&](const Draw& d) {
        auto r = check_direction_sandwich(model, d.x, d.p, d.q, constants);
        return std::vector<LemmaResidual>(r.begin(), r.end());
      },
      [&](const Draw& d) {
        auto r = check_curvature_pinching(model, d.x, d.p, d.q, constants);
        return std::vector<LemmaResidual>(r.begin(), r.end());
      },
      [&](const Draw& d) {
        auto r = check_polar_growth_and_holder(model, d.x, d.y, d.q, constants);
        return std::vector<LemmaResidual>(r.begin(), r.end());
      },
  };
  if (spec.include_gradient_duality) {
    checkers.push_back([&](const Draw& d) {
      return std::vector<LemmaResidual>{check_gradient_duality(model, d.x, d.p)};
    });
  }

  std::vector<LemmaResidual> rows;
  for (std::size_t c = 0; c < checkers.size(); ++c) {
    const auto ds = draws(c);
    std::vector<std::vector<LemmaResidual>> out(ds.size());
    parallel_for(ds.size(), spec.threads, [&](std::size_t i) { out[i] = checkers[c](ds[i]); });
    // Group by lemma id so each inequality's rows are contiguous.
    const std::size_t per = out.empty() ? 0 : out.front().size();
    for (std::size_t j = 0; j < per; ++j) {
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i][j].sample_index = i;
        rows.push_back(std::move(out[i][j]));
      }
    }
  }
  return rows;
}

double min_margin(std::span<const LemmaResidual> rows) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) m = std::min(m, r.margin);
  return m;
}

void write_residuals_csv(std::ostream& out, std::span<const LemmaResidual> rows) {
  out << "lemma_id,sample_index,lhs,rhs,margin\n";
  for (const auto& r : rows) {
    fmt::print(out, "{},{},{:.17g},{:.17g},{:.17g}\n", r.lemma_id, r.sample_index, r.lhs, r.rhs, r.margin);
  }
}

}  // namespace hjlab
