#include "hjlab/audit.hpp"

#include "hjlab/detail/polar_search.hpp"
#include "hjlab/detail/search.hpp"
#include "hjlab/exponent_fit.hpp"
#include "hjlab/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>
#include <random>

namespace hjlab {

bool AuditReport::declared_constants_hold(double tolerance) const {
  return std::all_of(worst_violations.begin(), worst_violations.end(),
                     [&](const AuditSample& s) { return s.residual >= -tolerance; });
}

namespace {

constexpr std::array<const char*, 7> kInequalities{"growth_lower", "growth_upper",          "holder",
                                                   "pinch_inner",  "pinch_outer",           "curvature_radius_lower",
                                                   "curvature_radius_upper"};

struct PairSample {
  Vec2 x, y, p, q;
  double d = 0.0;
};

struct PerSample {
  double h = 0.0;       // H(x, p), |p| = 1
  double dh = 0.0;      // |H(x,p) - H(y,p)|
  double ratio = std::numeric_limits<double>::quiet_NaN();  // |df|^2 / (2 s) for the (p, q) pair
  double pinch_inner = 0.0;  // declared-constant residuals
  double pinch_outer = 0.0;
};

class Auditor {
 public:
  Auditor(const HamiltonianModel& model, const Box& box, const AuditOptions& opt)
      : model_(model), box_(box), opt_(opt) {
    angles_.resize(opt.partition_count);
    for (int k = 0; k < opt.partition_count; ++k) angles_[k] = 2.0 * kPi * k / opt.partition_count;
    curvature_step_ = model.provenance() == Provenance::closed_form ? 1e-5 : 1e-3;
  }

  double h_unit(const Vec2& x, double angle) const { return model_.eval_h(x, unit_vector(angle)); }

  /// Radius of curvature of the velocity set boundary at the support point
  /// with outer normal e(angle): |d f / d angle|.
  double curvature_radius(const Vec2& x, double angle) const {
    const double d = curvature_step_;
    const Vec2 fp = model_.grad_p(x, unit_vector(angle + d));
    const Vec2 fm = model_.grad_p(x, unit_vector(angle - d));
    return (fp - fm).norm() / (2.0 * std::sin(d));
  }

  std::pair<detail::ArgMax, detail::ArgMax> h_extrema(const Vec2& x) const {
    return detail::circle_extrema([&](double a) { return h_unit(x, a); }, angles_, opt_.refine_iters);
  }
  std::pair<detail::ArgMax, detail::ArgMax> radius_extrema(const Vec2& x) const {
    return detail::circle_extrema([&](double a) { return curvature_radius(x, a); }, angles_, opt_.refine_iters);
  }

  /// Sharpens max over x in the box of g(x), starting at x0.
  template <class G>
  std::pair<Vec2, double> sharpen_x(G&& g, const Vec2& x0) const {
    auto objective = [&](const Vec2& x) {
      return box_.contains(x) ? g(x) : -std::numeric_limits<double>::infinity();
    };
    const Vec2 step = 0.05 * box_.extent();
    return detail::compass_maximize(objective, x0, step, 1e-10, 3000);
  }

  const HamiltonianModel& model_;
  Box box_;
  AuditOptions opt_;
  std::vector<double> angles_;
  double curvature_step_ = 1e-5;
};

std::vector<std::size_t> top_indices(const std::vector<double>& score, std::size_t k) {
  std::vector<std::size_t> idx(score.size());
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](std::size_t a, std::size_t b) {
    return score[a] > score[b] || (score[a] == score[b] && a < b);
  });
  idx.resize(k);
  return idx;
}

}  // namespace

AuditReport audit_standing_assumptions(const HamiltonianModel& model, const Box& domain, int sample_count,
                                       std::uint64_t seed, const AuditOptions& options) {
  if (sample_count < 100) throw ConfigError(fmt::format("audit needs at least 100 samples, got {}", sample_count));
  if (!(options.scale_min > 0.0 && options.scale_max > options.scale_min)) {
    throw ConfigError("audit scale range must satisfy 0 < scale_min < scale_max");
  }
  const StandingConstants& decl = model.constants();
  const Auditor au(model, domain, options);

  // Seeded sample generation (sequential, so independent of the thread count).
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(domain.lo.x(), domain.hi.x());
  std::uniform_real_distribution<double> uy(domain.lo.y(), domain.hi.y());
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> log_scale(std::log(options.scale_min), std::log(options.scale_max));
  std::vector<PairSample> samples(sample_count);
  for (auto& s : samples) {
    s.x = Vec2(ux(rng), uy(rng));
    const Vec2 dir = unit_vector(angle(rng));
    s.d = std::exp(log_scale(rng));
    s.y = s.x + s.d * dir;
    if (!domain.contains(s.y)) s.y = s.x - s.d * dir;
    s.p = unit_vector(angle(rng));
    s.q = unit_vector(angle(rng));
  }

  std::vector<PerSample> per(sample_count);
  parallel_for(samples.size(), options.threads, [&](std::size_t i) {
    const auto& s = samples[i];
    auto& o = per[i];
    o.h = model.eval_h(s.x, s.p);
    o.dh = domain.contains(s.y) ? std::abs(o.h - model.eval_h(s.y, s.p)) : 0.0;
    const Vec2 df = model.grad_p(s.x, s.q) - model.grad_p(s.x, s.p);
    const double inner = df.dot(s.p);
    const double sq = df.squaredNorm();
    o.pinch_inner = inner + sq / (2.0 * decl.r);
    o.pinch_outer = -sq / (2.0 * decl.R) - inner;
    if (-inner > 1e-14) o.ratio = sq / (-2.0 * inner);
  });

  AuditReport rep;
  rep.declared = decl;
  rep.domain = domain;
  rep.sample_count = sample_count;
  rep.seed = seed;

  std::array<AuditSample, kInequalities.size()> worst;
  for (std::size_t k = 0; k < worst.size(); ++k) {
    worst[k].inequality = kInequalities[k];
    worst[k].residual = std::numeric_limits<double>::infinity();
  }
  auto consider = [&](std::size_t id, double residual, std::vector<double> sample) {
    if (residual < worst[id].residual) worst[id] = {kInequalities[id], std::move(sample), residual};
  };

  // --- growth: sampled values, then per-x direction extrema sharpened in x.
  rep.r_hat = std::numeric_limits<double>::infinity();
  rep.R_hat = 0.0;
  double ratio_min = std::numeric_limits<double>::infinity();
  double ratio_max = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const auto& o = per[i];
    rep.r_hat = std::min(rep.r_hat, o.h);
    rep.R_hat = std::max(rep.R_hat, o.h);
    consider(0, o.h - decl.r, {s.x.x(), s.x.y(), s.p.x(), s.p.y()});
    consider(1, decl.R - o.h, {s.x.x(), s.x.y(), s.p.x(), s.p.y()});
    consider(2, decl.c0 * std::pow(s.d, 2.0 * decl.alpha) - o.dh, {s.x.x(), s.x.y(), s.y.x(), s.y.y(), s.p.x(), s.p.y()});
    consider(3, o.pinch_inner, {s.x.x(), s.x.y(), s.p.x(), s.p.y(), s.q.x(), s.q.y()});
    consider(4, o.pinch_outer, {s.x.x(), s.x.y(), s.p.x(), s.p.y(), s.q.x(), s.q.y()});
    if (!std::isnan(o.ratio)) {
      ratio_min = std::min(ratio_min, o.ratio);
      ratio_max = std::max(ratio_max, o.ratio);
    }
  }

  const std::size_t n_extrema = std::min<std::size_t>(samples.size(), 512);
  struct XExtrema {
    double hmin, hmax, rmin, rmax;
  };
  std::vector<XExtrema> xe(n_extrema);
  parallel_for(n_extrema, options.threads, [&](std::size_t i) {
    const auto [hmn, hmx] = au.h_extrema(samples[i].x);
    const auto [rmn, rmx] = au.radius_extrema(samples[i].x);
    xe[i] = {hmn.value, hmx.value, rmn.value, rmx.value};
  });

  std::vector<double> score(n_extrema);
  const std::size_t starts = static_cast<std::size_t>(std::max(1, options.refine_starts));

  // Four sharpening problems: min/max of H and of the curvature radius.
  std::array<std::vector<std::pair<Vec2, double>>, 4> sharpened;
  std::array<std::vector<Vec2>, 4> start_points;
  for (int which = 0; which < 4; ++which) {
    for (std::size_t i = 0; i < n_extrema; ++i) {
      switch (which) {
        case 0: score[i] = -xe[i].hmin; break;
        case 1: score[i] = xe[i].hmax; break;
        case 2: score[i] = -xe[i].rmin; break;
        default: score[i] = xe[i].rmax; break;
      }
    }
    for (auto i : top_indices(score, starts)) start_points[which].push_back(samples[i].x);
    sharpened[which].resize(start_points[which].size());
  }
  std::vector<std::pair<int, std::size_t>> jobs;
  for (int which = 0; which < 4; ++which) {
    for (std::size_t j = 0; j < start_points[which].size(); ++j) jobs.emplace_back(which, j);
  }
  parallel_for(jobs.size(), options.threads, [&](std::size_t k) {
    const auto [which, j] = jobs[k];
    const Vec2 x0 = start_points[which][j];
    switch (which) {
      case 0: sharpened[0][j] = au.sharpen_x([&](const Vec2& x) { return -au.h_extrema(x).first.value; }, x0); break;
      case 1: sharpened[1][j] = au.sharpen_x([&](const Vec2& x) { return au.h_extrema(x).second.value; }, x0); break;
      case 2: sharpened[2][j] = au.sharpen_x([&](const Vec2& x) { return -au.radius_extrema(x).first.value; }, x0); break;
      default: sharpened[3][j] = au.sharpen_x([&](const Vec2& x) { return au.radius_extrema(x).second.value; }, x0); break;
    }
  });

  double rho_min = std::numeric_limits<double>::infinity();
  double rho_max = 0.0;
  for (std::size_t i = 0; i < n_extrema; ++i) {
    rep.r_hat = std::min(rep.r_hat, xe[i].hmin);
    rep.R_hat = std::max(rep.R_hat, xe[i].hmax);
    rho_min = std::min(rho_min, xe[i].rmin);
    rho_max = std::max(rho_max, xe[i].rmax);
  }
  for (const auto& [x, v] : sharpened[0]) {
    rep.r_hat = std::min(rep.r_hat, -v);
    consider(0, -v - decl.r, {x.x(), x.y()});
  }
  for (const auto& [x, v] : sharpened[1]) {
    rep.R_hat = std::max(rep.R_hat, v);
    consider(1, decl.R - v, {x.x(), x.y()});
  }
  for (const auto& [x, v] : sharpened[2]) {
    rho_min = std::min(rho_min, -v);
    consider(5, -v - decl.r, {x.x(), x.y()});
  }
  for (const auto& [x, v] : sharpened[3]) {
    rho_max = std::max(rho_max, v);
    consider(6, decl.R - v, {x.x(), x.y()});
  }
  rep.pinch_inner_hat = std::min(rho_min, ratio_min);
  rep.pinch_outer_hat = std::max(rho_max, ratio_max);

  // --- Hoelder increments: per-bin envelope with local sharpening at fixed |x - y|.
  const int nb = std::max(2, options.bins);
  const double lmin = std::log(options.scale_min);
  const double lwidth = (std::log(options.scale_max) - lmin) / nb;
  std::vector<std::vector<std::size_t>> bin_members(nb);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const int b = std::clamp(static_cast<int>((std::log(samples[i].d) - lmin) / lwidth), 0, nb - 1);
    bin_members[b].push_back(i);
  }
  struct HolderJob {
    int bin;
    std::size_t sample;
  };
  std::vector<HolderJob> hjobs;
  for (int b = 0; b < nb; ++b) {
    std::vector<double> sc;
    for (auto i : bin_members[b]) sc.push_back(per[i].dh);
    for (auto j : top_indices(sc, starts)) hjobs.push_back({b, bin_members[b][j]});
  }
  struct HolderResult {
    Vec2 x, y, p;
    double d = 0.0, dh = 0.0;
  };
  std::vector<HolderResult> hres(hjobs.size());
  parallel_for(hjobs.size(), options.threads, [&](std::size_t k) {
    const auto& s = samples[hjobs[k].sample];
    const double d = s.d;
    auto increment = [&](const Eigen::Vector4d& v) {
      const Vec2 x(v[0], v[1]);
      const Vec2 y = x + d * unit_vector(v[2]);
      if (!domain.contains(x) || !domain.contains(y)) return -std::numeric_limits<double>::infinity();
      const Vec2 p = unit_vector(v[3]);
      return std::abs(model.eval_h(x, p) - model.eval_h(y, p));
    };
    const Vec2 dir = (s.y - s.x) / d;
    Eigen::Vector4d v0(s.x.x(), s.x.y(), angle_of(dir), angle_of(s.p));
    const Eigen::Vector4d step(0.05 * domain.extent().x(), 0.05 * domain.extent().y(), 0.3, 0.3);
    auto [v, val] = detail::compass_maximize(increment, v0, step, 1e-10, 4000);
    if (!std::isfinite(val)) val = 0.0;
    const Vec2 x(v[0], v[1]);
    hres[k] = {x, x + d * unit_vector(v[2]), unit_vector(v[3]), d, val};
  });

  const double two_alpha = 2.0 * decl.alpha;
  rep.c0_hat = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].d > 0.0) rep.c0_hat = std::max(rep.c0_hat, per[i].dh / std::pow(samples[i].d, two_alpha));
  }
  std::vector<std::pair<double, double>> envelope(nb, {0.0, 0.0});
  for (std::size_t k = 0; k < hjobs.size(); ++k) {
    const auto& r = hres[k];
    rep.c0_hat = std::max(rep.c0_hat, r.dh / std::pow(r.d, two_alpha));
    consider(2, decl.c0 * std::pow(r.d, two_alpha) - r.dh, {r.x.x(), r.x.y(), r.y.x(), r.y.y(), r.p.x(), r.p.y()});
    auto& e = envelope[hjobs[k].bin];
    if (r.dh > e.second) e = {r.d, r.dh};
  }
  std::vector<double> lx, ly;
  for (const auto& e : envelope) {
    if (e.second > 0.0) {
      rep.holder_envelope.push_back(e);
      lx.push_back(std::log(e.first));
      ly.push_back(std::log(e.second));
    }
  }
  if (lx.size() >= 2) rep.alpha_hat = 0.5 * least_squares_line(lx, ly).first;

  rep.worst_violations.assign(worst.begin(), worst.end());
  return rep;
}

}  // namespace hjlab
