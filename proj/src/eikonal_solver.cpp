#include "hjlab/eikonal_solver.hpp"

#include "hjlab/detail/search.hpp"
#include "hjlab/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <deque>
#include <limits>
#include <unordered_map>

namespace hjlab {

void GridSpec::validate() const {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ConfigError(fmt::format("grid spacing must be positive, got {}", spacing));
  if (nx < 8 || ny < 8) throw ConfigError(fmt::format("grid extents must be at least 8, got {}x{}", nx, ny));
  if (!origin.allFinite()) throw ConfigError("grid origin must be finite");
}

GridSpec GridSpec::square(const Box& box, int n) {
  const Vec2 ext = box.extent();
  if (n < 2 || std::abs(ext.x() - ext.y()) > 1e-12 * ext.norm()) {
    throw ConfigError("square grid needs a square box and at least two nodes per side");
  }
  GridSpec g{box.lo, ext.x() / (n - 1), n, n};
  g.validate();
  return g;
}

bool shape_contains(const DomainShape& shape, const Vec2& x) {
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BallShape>) {
          return (x - s.center).norm() < s.radius;
        } else if constexpr (std::is_same_v<T, BoxShape>) {
          return (x.array() > s.box.lo.array()).all() && (x.array() < s.box.hi.array()).all();
        } else if constexpr (std::is_same_v<T, AnnulusShape>) {
          const double r = (x - s.center).norm();
          return r > s.inner && r < s.outer;
        } else {
          return s.phi(x) < 0.0;
        }
      },
      shape);
}

std::uint64_t DomainMask::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](std::uint8_t b) {
    h ^= b;
    h *= 1099511628211ULL;
  };
  for (auto b : inside) mix(b);
  for (auto b : band) mix(b);
  return h;
}

namespace {

constexpr std::array<std::array<int, 2>, 8> kRing{{{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};

// Breadth-first labelling of flagged nodes under 8-connectivity, seeded from `seeds`.
std::vector<std::uint8_t> flood(const GridSpec& g, const std::vector<std::uint8_t>& passable,
                                const std::vector<std::size_t>& seeds) {
  std::vector<std::uint8_t> seen(g.size(), 0);
  std::deque<std::size_t> queue;
  for (auto s : seeds) {
    if (!seen[s]) {
      seen[s] = 1;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const std::size_t k = queue.front();
    queue.pop_front();
    const int i = static_cast<int>(k % g.nx), j = static_cast<int>(k / g.nx);
    for (const auto& d : kRing) {
      const int a = i + d[0], b = j + d[1];
      if (!g.in_range(a, b)) continue;
      const std::size_t n = g.index(a, b);
      if (passable[n] && !seen[n]) {
        seen[n] = 1;
        queue.push_back(n);
      }
    }
  }
  return seen;
}

}  // namespace

DomainMask build_domain(const DomainShape& shape, const GridSpec& grid) {
  grid.validate();
  DomainMask mask;
  mask.grid = grid;
  mask.inside.assign(grid.size(), 0);
  mask.band.assign(grid.size(), 0);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      if (shape_contains(shape, grid.node(i, j))) {
        mask.inside[grid.index(i, j)] = 1;
        ++mask.inside_count;
      }
    }
  }
  if (mask.inside_count == 0) throw ConfigError("domain has no interior nodes on this grid");

  std::vector<std::size_t> band_nodes;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const std::size_t k = grid.index(i, j);
      if (mask.inside[k]) continue;
      for (const auto& d : kRing) {
        if (grid.in_range(i + d[0], j + d[1]) && mask.inside[grid.index(i + d[0], j + d[1])]) {
          mask.band[k] = 1;
          band_nodes.push_back(k);
          break;
        }
      }
    }
  }
  mask.band_count = band_nodes.size();
  if (band_nodes.empty()) throw ConfigError("domain has no boundary within the grid");

  std::vector<std::uint8_t> passable(mask.inside);
  for (auto k : band_nodes) passable[k] = 1;
  const auto reached = flood(grid, passable, band_nodes);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (mask.inside[k] && !reached[k]) {
      const Vec2 x = grid.node(k);
      throw ConfigError(fmt::format("inside node ({}, {}) has no inside path to the boundary", x.x(), x.y()));
    }
  }
  return mask;
}

int count_boundary_components(const DomainMask& mask) {
  std::vector<std::uint8_t> done(mask.grid.size(), 0);
  int count = 0;
  for (std::size_t k = 0; k < mask.grid.size(); ++k) {
    if (!mask.band[k] || done[k]) continue;
    ++count;
    const auto comp = flood(mask.grid, mask.band, {k});
    for (std::size_t n = 0; n < comp.size(); ++n) done[n] |= comp[n];
  }
  return count;
}

double ValueField::interpolate(const Vec2& x) const {
  const Vec2 g = (x - grid.origin) / grid.spacing;
  if (!(g.x() >= 0.0 && g.y() >= 0.0 && g.x() <= grid.nx - 1 && g.y() <= grid.ny - 1)) return kInf;
  const int i = std::min(static_cast<int>(g.x()), grid.nx - 2);
  const int j = std::min(static_cast<int>(g.y()), grid.ny - 2);
  const double a = g.x() - i, b = g.y() - j;
  const std::array<double, 4> w{(1 - a) * (1 - b), a * (1 - b), (1 - a) * b, a * b};
  const std::array<double, 4> v{at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1)};
  double s = 0.0;
  for (int c = 0; c < 4; ++c) {
    if (w[c] == 0.0) continue;
    if (!std::isfinite(v[c])) return kInf;
    s += w[c] * v[c];
  }
  return s;
}

double ValueField::max_finite() const {
  double m = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) m = std::max(m, v);
  }
  return m;
}

namespace {

// Where the ray x + s e leaves the one-ring square: s = h / max(|ex|, |ey|),
// between ring neighbors a and b with weight lambda on b.
struct RingHit {
  int ai = 0, aj = 0, bi = 0, bj = 0;
  double lambda = 0.0;
  double length = 0.0;  // s / h
};

RingHit ring_hit(const Vec2& e) {
  RingHit r;
  const double ax = std::abs(e.x()), ay = std::abs(e.y());
  if (ax >= ay) {
    const int sx = e.x() >= 0 ? 1 : -1;
    const double t = e.y() / ax;
    r = {sx, 0, sx, t >= 0 ? 1 : -1, std::abs(t), 1.0 / ax};
  } else {
    const int sy = e.y() >= 0 ? 1 : -1;
    const double t = e.x() / ay;
    r = {0, sy, t >= 0 ? 1 : -1, sy, std::abs(t), 1.0 / ay};
  }
  return r;
}

class Sweeper {
 public:
  Sweeper(const HamiltonianModel& model, const DomainMask& mask, const SolverParams& params)
      : model_(model), mask_(mask), g_(mask.grid), params_(params) {
    const int m = params.direction_count;
    dirs_.resize(m);
    hits_.resize(m);
    for (int k = 0; k < m; ++k) {
      dirs_[k] = unit_vector(2.0 * kPi * k / m);
      hits_[k] = ring_hit(dirs_[k]);
    }
    slot_.assign(g_.size(), -1);
    for (std::size_t k = 0; k < g_.size(); ++k) {
      if (mask.inside[k]) {
        slot_[k] = static_cast<std::ptrdiff_t>(nodes_.size());
        nodes_.push_back(k);
      }
    }
    build_costs();
  }

  ValueField run() {
    ValueField f;
    f.grid = g_;
    f.mask = mask_;
    f.params = params_;
    f.values.assign(g_.size(), 0.0);
    for (auto k : nodes_) f.values[k] = kInf;
    u_ = &f.values;

    double cycle_change = kInf;
    for (int sweep = 0; sweep < params_.max_sweeps; ++sweep) {
      if (sweep % 4 == 0) cycle_change = 0.0;
      cycle_change = std::max(cycle_change, sweep_once(sweep % 4));
      f.iterations = sweep + 1;
      f.residual = cycle_change;
      if (sweep % 4 == 3 && cycle_change < params_.tolerance) {
        f.converged = true;
        break;
      }
    }
    for (auto k : nodes_) f.unreached += std::isfinite(f.values[k]) ? 0 : 1;
    return f;
  }

 private:
  void build_costs() {
    const std::size_t m = dirs_.size();
    costs_.assign(nodes_.size() * m, kInf);
    parallel_for(nodes_.size(), params_.threads, [&](std::size_t n) {
      const Vec2 x = g_.node(nodes_[n]);
      std::span<double> row(costs_.data() + n * m, m);
      try {
        model_.polar_batch(x, dirs_, row);
      } catch (const Error& e) {
        throw EvaluationError(fmt::format("solver: model evaluation failed at node ({}, {}): {}", x.x(), x.y(), e.what()), x);
      }
      for (std::size_t k = 0; k < m; ++k) row[k] *= g_.spacing * hits_[k].length;
    });
  }

  double value(int i, int j) const { return g_.in_range(i, j) ? (*u_)[g_.index(i, j)] : kInf; }

  double candidate(int i, int j, const RingHit& hit, double cost) const {
    const double ua = value(i + hit.ai, j + hit.aj);
    if (hit.lambda == 0.0) return cost + ua;
    const double ub = value(i + hit.bi, j + hit.bj);
    if (hit.lambda == 1.0) return cost + ub;
    return cost + (1.0 - hit.lambda) * ua + hit.lambda * ub;
  }

  double update(int i, int j, std::size_t row) const {
    const std::size_t m = dirs_.size();
    const double* cost = costs_.data() + row * m;
    double best = kInf;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < m; ++k) {
      const double c = candidate(i, j, hits_[k], cost[k]);
      if (c < best) {
        best = c;
        arg = k;
      }
    }
    if (!params_.refine || !std::isfinite(best)) return best;
    const Vec2 x = g_.node(i, j);
    const double a0 = 2.0 * kPi * static_cast<double>(arg) / static_cast<double>(m);
    const double da = 2.0 * kPi / static_cast<double>(m);
    auto neg = [&](double a) {
      const Vec2 e = unit_vector(a);
      const RingHit hit = ring_hit(e);
      return -candidate(i, j, hit, g_.spacing * hit.length * model_.polar(x, e));
    };
    const auto r = detail::golden_maximize(neg, a0 - da, a0 + da, params_.refine_iters);
    return std::min(best, -r.value);
  }

  double sweep_once(int order) {
    const bool rev_i = order == 1 || order == 2;
    const bool rev_j = order >= 2;
    double change = 0.0;
    for (int jj = 0; jj < g_.ny; ++jj) {
      const int j = rev_j ? g_.ny - 1 - jj : jj;
      for (int ii = 0; ii < g_.nx; ++ii) {
        const int i = rev_i ? g_.nx - 1 - ii : ii;
        const std::size_t k = g_.index(i, j);
        if (slot_[k] < 0) continue;
        const double c = update(i, j, static_cast<std::size_t>(slot_[k]));
        double& u = (*u_)[k];
        if (c < u) {
          change = std::max(change, u - c);
          u = c;
        }
      }
    }
    return change;
  }

  const HamiltonianModel& model_;
  const DomainMask& mask_;
  const GridSpec& g_;
  SolverParams params_;
  std::vector<Vec2> dirs_;
  std::vector<RingHit> hits_;
  std::vector<std::ptrdiff_t> slot_;
  std::vector<std::size_t> nodes_;
  std::vector<double> costs_;
  std::vector<double>* u_ = nullptr;
};

}  // namespace

ValueField solve_min_time(const HamiltonianModel& model, const DomainMask& mask, const SolverParams& params) {
  mask.grid.validate();
  if (params.direction_count < 4) throw ConfigError("solver needs at least 4 directions");
  if (params.max_sweeps < 1) throw ConfigError("max_sweeps must be positive");
  if (!(params.tolerance >= 0.0)) throw ConfigError("solver tolerance must be nonnegative");
  return Sweeper(model, mask, params).run();
}

ValueField distance_to_boundary(const DomainMask& mask, const SolverParams& params) {
  static const HamiltonianModel euclid = make_matrix_field_model(MatrixFieldSpec{}, StandingConstants{0.5, 2.0, 1.0, 0.25});
  return solve_min_time(euclid, mask, params);
}

std::vector<Polyline> extract_level_set(const ValueField& u, double t) {
  std::vector<Polyline> out;
  if (!(t >= 0.0) || !(t < u.max_finite())) return out;
  const GridSpec& g = u.grid;

  // Edge ids: 2k for (i,j)-(i+1,j), 2k+1 for (i,j)-(i,j+1), k = index(i,j).
  std::unordered_map<std::size_t, Vec2> point;
  std::vector<std::array<std::size_t, 2>> segs;
  auto crossing = [&](int i0, int j0, int i1, int j1) {
    const double f0 = u.at(i0, j0) - t, f1 = u.at(i1, j1) - t;
    const std::size_t id = 2 * g.index(i0, j0) + (j1 != j0 ? 1 : 0);
    if (!point.count(id)) {
      const double s = f0 / (f0 - f1);
      point[id] = g.node(i0, j0) + s * (g.node(i1, j1) - g.node(i0, j0));
    }
    return id;
  };

  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const std::array<double, 4> v{u.at(i, j), u.at(i + 1, j), u.at(i + 1, j + 1), u.at(i, j + 1)};
      if (!std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); })) continue;
      std::array<bool, 4> up{};
      for (int c = 0; c < 4; ++c) up[c] = v[c] - t > 0.0;
      std::array<std::size_t, 4> e{};
      std::array<bool, 4> cut{};
      cut[0] = up[0] != up[1];
      cut[1] = up[1] != up[2];
      cut[2] = up[3] != up[2];
      cut[3] = up[0] != up[3];
      if (cut[0]) e[0] = crossing(i, j, i + 1, j);
      if (cut[1]) e[1] = crossing(i + 1, j, i + 1, j + 1);
      if (cut[2]) e[2] = crossing(i, j + 1, i + 1, j + 1);
      if (cut[3]) e[3] = crossing(i, j, i, j + 1);
      const int n = cut[0] + cut[1] + cut[2] + cut[3];
      if (n == 2) {
        std::array<std::size_t, 2> s{};
        int w = 0;
        for (int c = 0; c < 4; ++c) {
          if (cut[c]) s[w++] = e[c];
        }
        segs.push_back(s);
      } else if (n == 4) {
        const bool center_up = (v[0] + v[1] + v[2] + v[3]) / 4.0 - t > 0.0;
        if (center_up == up[0]) {
          segs.push_back({e[0], e[1]});
          segs.push_back({e[2], e[3]});
        } else {
          segs.push_back({e[0], e[3]});
          segs.push_back({e[1], e[2]});
        }
      }
    }
  }

  std::unordered_map<std::size_t, std::vector<std::size_t>> at_edge;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    at_edge[segs[s][0]].push_back(s);
    at_edge[segs[s][1]].push_back(s);
  }
  std::vector<std::uint8_t> used(segs.size(), 0);
  auto walk = [&](std::size_t s, std::size_t from) {
    Polyline line{point[from]};
    std::size_t edge = from;
    while (true) {
      used[s] = 1;
      edge = segs[s][0] == edge ? segs[s][1] : segs[s][0];
      line.push_back(point[edge]);
      std::size_t next = segs.size();
      for (auto c : at_edge[edge]) {
        if (!used[c]) {
          next = c;
          break;
        }
      }
      if (next == segs.size()) break;
      s = next;
    }
    out.push_back(std::move(line));
  };
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (used[s]) continue;
    for (int end = 0; end < 2; ++end) {
      if (!used[s] && at_edge[segs[s][end]].size() == 1) walk(s, segs[s][end]);
    }
  }
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (!used[s]) walk(s, segs[s][0]);
  }
  return out;
}

}  // namespace hjlab
