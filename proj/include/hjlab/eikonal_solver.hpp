#ifndef HJLAB_EIKONAL_SOLVER_HPP
#define HJLAB_EIKONAL_SOLVER_HPP

#include "hjlab/hamiltonians.hpp"

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

namespace hjlab {

/// Uniform 2D grid; node (i, j) sits at origin + spacing * (i, j) and is
/// stored row-major at j * nx + i.
struct GridSpec {
  Vec2 origin = Vec2::Zero();
  double spacing = 0.0;
  int nx = 0;
  int ny = 0;

  void validate() const;
  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  Vec2 node(int i, int j) const { return origin + spacing * Vec2(i, j); }
  Vec2 node(std::size_t k) const { return node(static_cast<int>(k % nx), static_cast<int>(k / nx)); }
  bool in_range(int i, int j) const { return i >= 0 && j >= 0 && i < nx && j < ny; }
  Box bounds() const { return {origin, node(nx - 1, ny - 1)}; }

  /// n x n nodes spanning the box exactly (requires a square box).
  static GridSpec square(const Box& box, int n);
};

struct BallShape {
  Vec2 center = Vec2::Zero();
  double radius = 1.0;
};
struct BoxShape {
  Box box;
};
struct AnnulusShape {
  Vec2 center = Vec2::Zero();
  double inner = 0.5;
  double outer = 1.0;
};
/// Omega = { x : phi(x) < 0 }.
struct ImplicitShape {
  std::function<double(const Vec2&)> phi;
};
using DomainShape = std::variant<BallShape, BoxShape, AnnulusShape, ImplicitShape>;

bool shape_contains(const DomainShape& shape, const Vec2& x);

/// inside[k] = 1 for nodes in Omega; band[k] = 1 for nodes outside Omega
/// with an inside 8-neighbor. Band nodes carry the Dirichlet datum.
struct DomainMask {
  GridSpec grid;
  std::vector<std::uint8_t> inside;
  std::vector<std::uint8_t> band;
  std::size_t inside_count = 0;
  std::size_t band_count = 0;

  /// FNV-1a over the inside and band flags.
  std::uint64_t hash() const;
};

/// Throws ConfigError on an empty interior, a missing boundary, or inside
/// nodes with no inside path to the band.
DomainMask build_domain(const DomainShape& shape, const GridSpec& grid);

/// Connected components of the band under 8-connectivity.
int count_boundary_components(const DomainMask& mask);

struct SolverParams {
  int direction_count = 128;
  double tolerance = 1e-8;
  int max_sweeps = 256;
  /// Golden-section refinement of the best direction at every update.
  bool refine = false;
  int refine_iters = 20;
  /// Workers for the per-node metric tables (the sweeps themselves are serial).
  int threads = 1;
};

struct ValueField {
  GridSpec grid;
  DomainMask mask;
  std::vector<double> values;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  std::size_t unreached = 0;
  SolverParams params;

  double at(int i, int j) const { return values[grid.index(i, j)]; }
  /// Bilinear interpolation; +inf outside the grid or next to an unreached node.
  double interpolate(const Vec2& x) const;
  double max_finite() const;
};

/// Semi-Lagrangian fast sweeping for the minimum time to leave Omega.
/// Throws EvaluationError (with the node position) when the model fails.
ValueField solve_min_time(const HamiltonianModel& model, const DomainMask& mask, const SolverParams& params = {});

/// Euclidean distance to the band, from an isotropic solve.
ValueField distance_to_boundary(const DomainMask& mask, const SolverParams& params = {});

using Polyline = std::vector<Vec2>;

/// Marching-squares contour {u = t} in world coordinates. Segments are
/// chained into polylines in a fixed order (open chains first). Returns an
/// empty set for t < 0 or t at or above the largest finite value.
std::vector<Polyline> extract_level_set(const ValueField& u, double t);

}  // namespace hjlab

#endif  // HJLAB_EIKONAL_SOLVER_HPP
