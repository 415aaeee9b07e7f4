#ifndef HJLAB_IO_HPP
#define HJLAB_IO_HPP

#include "hjlab/audit.hpp"
#include "hjlab/convex_duality.hpp"
#include "hjlab/eikonal_solver.hpp"
#include "hjlab/regularity_probe.hpp"
#include "hjlab/trajectories.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hjlab {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Serializes with every double printed as 17 significant digits.
/// Non-finite doubles become null; use json_number() to keep them as text.
std::string dump_json(const Json& j, int indent = 2);

/// A double as a JSON number, or "inf" / "-inf" / "nan" for non-finite values.
Json json_number(double v);
Json to_json(const Vec2& v);
Json to_json(const ExponentFit& fit, const std::string& lemma);
Json to_json(const AuditReport& report);

// ---------------------------------------------------------------------------
// Run configuration

struct ModelConfig {
  MatrixFieldSpec field;
  StandingConstants constants;
  /// Route every map through the generic numeric path instead of the closed forms.
  bool numeric_fallback = false;
  NumericParams numeric;
};

struct TraceRequest {
  Vec2 x0 = Vec2::Zero();
  double dt = 0.0;  // 0: 2 * spacing / r
  TraceMode mode = TraceMode::dpp;
};

struct ProbeConfig {
  ProbeSpec spec;
  FitWindow window;
};

struct AuditConfig {
  Box domain{Vec2(-1.0, -1.0), Vec2(1.0, 1.0)};
  int sample_count = 2000;
  int samples_per_lemma = 1000;
  double tolerance = 1e-8;
  bool gradient_duality = true;
  AuditOptions options;
};

enum class Oracle { none, isotropic_ball, boundary_minimization };

/// Acceptance thresholds; a check runs only when its limit is set.
struct Thresholds {
  Oracle oracle = Oracle::none;
  std::optional<double> oracle_max_spacings;
  std::optional<double> dpp_max_spacings;
  std::optional<double> velocity_holder_min;
  std::optional<double> midpoint_defect_min;
  std::optional<double> chord_defect_min;
  std::optional<double> theta_min;
  bool require_converged = true;
};

enum class FieldFormat { csv, binary };

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  ModelConfig model;
  std::optional<GridSpec> grid;
  std::optional<DomainShape> shape;
  std::optional<SolverParams> solver;
  /// Prior solve to load instead of solving.
  std::optional<std::filesystem::path> field_path;
  std::vector<double> level_sets;
  std::vector<TraceRequest> traces;
  std::optional<ProbeConfig> probe;
  AuditConfig audit;
  Thresholds thresholds;
  FieldFormat field_format = FieldFormat::csv;
  int threads = 1;
};

/// Throws ConfigError with the offending key on malformed input.
RunConfig parse_config(const Json& j);
RunConfig load_config(const std::filesystem::path& path);

HamiltonianModel build_model(const ModelConfig& config);

FieldFormat parse_field_format(const std::string& name);

/// One JSON header line, then node values in row-major order (one per
/// line for csv, little-endian doubles for binary).
void write_field(std::ostream& out, const ValueField& u, FieldFormat format);
/// Reads a field written by write_field; the mask must match the header's hash.
ValueField read_field(std::istream& in, const DomainMask& mask);

/// CSV `poly_id,vertex_index,x,y`.
void write_level_set_csv(std::ostream& out, const std::vector<Polyline>& lines);

}  // namespace hjlab

#endif  // HJLAB_IO_HPP
