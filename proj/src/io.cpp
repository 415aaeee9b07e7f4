#include "hjlab/io.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hjlab {

namespace {

void dump_to(std::string& out, const Json& j, int indent, int depth) {
  const std::string pad = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent) * (depth + 1), ' ') : "";
  const std::string close = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent) * depth, ' ') : "";
  const char* sep = indent > 0 ? ": " : ":";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += pad;
        out += Json(it.key()).dump();
        out += sep;
        dump_to(out, it.value(), indent, depth + 1);
      }
      out += close;
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        out += pad;
        dump_to(out, v, indent, depth + 1);
      }
      out += close;
      out += ']';
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? fmt::format("{:.17g}", v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::string out;
  dump_to(out, j, indent, 0);
  return out;
}

Json json_number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

Json to_json(const Vec2& v) { return Json::array({v.x(), v.y()}); }

Json to_json(const ExponentFit& fit, const std::string& lemma) {
  Json j;
  j["lemma"] = lemma;
  j["status"] = fit.vacuous() ? "vacuous" : "fitted";
  j["exponent"] = json_number(fit.exponent);
  j["constant"] = json_number(fit.constant);
  j["window"] = Json::array({fit.window_min, fit.window_max});
  j["pair_count"] = fit.pair_count;
  j["max_positive_residual"] = json_number(fit.max_positive_residual);
  return j;
}

Json to_json(const AuditReport& r) {
  Json j;
  j["r_hat"] = r.r_hat;
  j["R_hat"] = r.R_hat;
  j["c0_hat"] = r.c0_hat;
  j["alpha_hat"] = r.alpha_hat ? Json(*r.alpha_hat) : Json(nullptr);
  j["pinch_inner_hat"] = r.pinch_inner_hat;
  j["pinch_outer_hat"] = r.pinch_outer_hat;
  j["declared"] = {{"r", r.declared.r}, {"R", r.declared.R}, {"c0", r.declared.c0}, {"alpha", r.declared.alpha}};
  j["declared_constants_hold"] = r.declared_constants_hold();
  Json worst = Json::array();
  for (const auto& s : r.worst_violations) {
    worst.push_back({{"inequality", s.inequality}, {"residual", s.residual}, {"sample", s.sample}});
  }
  j["worst_violations"] = worst;
  Json env = Json::array();
  for (const auto& [scale, value] : r.holder_envelope) env.push_back(Json::array({scale, value}));
  j["holder_envelope"] = env;
  j["domain"] = {{"lo", to_json(r.domain.lo)}, {"hi", to_json(r.domain.hi)}};
  j["sample_count"] = r.sample_count;
  j["seed"] = r.seed;
  return j;
}

// ---------------------------------------------------------------------------

namespace {

Vec2 get_vec2(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(fmt::format("{}: expected [x, y]", where));
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

Mat2 get_mat2(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(fmt::format("{}: expected [[a, b], [c, d]]", where));
  Mat2 m;
  m.row(0) = get_vec2(j[0], where).transpose();
  m.row(1) = get_vec2(j[1], where).transpose();
  return m;
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

Box get_box(const Json& j, const std::string& where) {
  Box b{get_vec2(j.at("lo"), where + ".lo"), get_vec2(j.at("hi"), where + ".hi")};
  if (!(b.lo.array() < b.hi.array()).all()) throw ConfigError(fmt::format("{}: need lo < hi", where));
  return b;
}

ScalarField parse_field(const Json& j, const std::string& where) {
  const auto type = j.at("type").get<std::string>();
  if (type == "power_bump") {
    return make_power_bump_field(get_vec2(j.at("center"), where + ".center"), j.at("amplitude").get<double>(),
                                 j.at("exponent").get<double>());
  }
  if (type == "trig_sum") {
    TrigSum t;
    for (const auto& f : j.at("frequencies")) t.frequencies.push_back(get_vec2(f, where + ".frequencies"));
    t.amplitudes = j.at("amplitudes").get<std::vector<double>>();
    t.phases = get_or(j, "phases", std::vector<double>{});
    if (t.amplitudes.size() != t.frequencies.size() || t.phases.size() > t.frequencies.size()) {
      throw ConfigError(fmt::format("{}: frequencies, amplitudes and phases must match in length", where));
    }
    return t;
  }
  throw ConfigError(fmt::format("{}.type: unknown field type '{}'", where, type));
}

ModelConfig parse_model(const Json& j, const std::optional<GridSpec>& grid) {
  ModelConfig m;
  const auto type = get_or<std::string>(j, "type", "matrix_field");
  if (type == "generic") {
    m.numeric_fallback = true;
  } else if (type != "matrix_field") {
    throw ConfigError(fmt::format("model.type: unknown model type '{}'", type));
  }
  m.numeric_fallback = get_or(j, "numeric_fallback", m.numeric_fallback);
  if (j.contains("base")) m.field.base = get_mat2(j.at("base"), "model.base");
  if (j.contains("perturbations")) {
    int k = 0;
    for (const auto& p : j.at("perturbations")) {
      const std::string where = fmt::format("model.perturbations[{}]", k++);
      m.field.perturbations.emplace_back(parse_field(p.at("field"), where + ".field"),
                                         get_mat2(p.at("matrix"), where + ".matrix"));
    }
  }
  if (j.contains("domain")) {
    m.field.domain = get_box(j.at("domain"), "model.domain");
  } else if (grid) {
    m.field.domain = grid->bounds();
  }
  m.field.sigma_floor = get_or(j, "sigma_floor", m.field.sigma_floor);
  const Json& c = j.at("constants");
  m.constants = {c.at("r").get<double>(), c.at("R").get<double>(), c.at("c0").get<double>(),
                 c.at("alpha").get<double>()};
  m.constants.validate();
  if (j.contains("numeric")) {
    const Json& n = j.at("numeric");
    m.numeric.partition_count = get_or(n, "partition_count", m.numeric.partition_count);
    m.numeric.refine_iters = get_or(n, "refine_iters", m.numeric.refine_iters);
    m.numeric.fd_step = get_or(n, "fd_step", m.numeric.fd_step);
  }
  m.numeric.domain = m.field.domain;
  return m;
}

GridSpec parse_grid(const Json& j) {
  GridSpec g;
  if (j.contains("box")) {
    g = GridSpec::square(get_box(j.at("box"), "grid.box"), j.at("n").get<int>());
  } else {
    g.origin = get_vec2(j.at("origin"), "grid.origin");
    g.spacing = j.at("spacing").get<double>();
    const auto dims = j.at("dims").get<std::vector<int>>();
    if (dims.size() != 2) throw ConfigError("grid.dims: only two-dimensional grids are supported");
    g.nx = dims[0];
    g.ny = dims[1];
  }
  g.validate();
  return g;
}

DomainShape parse_shape(const Json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "ball") {
    BallShape b{get_vec2(j.at("center"), "domain.center"), j.at("radius").get<double>()};
    if (!(b.radius > 0.0)) throw ConfigError("domain.radius must be positive");
    return b;
  }
  if (type == "box") return BoxShape{get_box(j, "domain")};
  if (type == "annulus") {
    AnnulusShape a{get_vec2(j.at("center"), "domain.center"), j.at("inner").get<double>(), j.at("outer").get<double>()};
    if (!(a.inner > 0.0 && a.outer > a.inner)) throw ConfigError("domain: annulus needs 0 < inner < outer");
    return a;
  }
  throw ConfigError(fmt::format("domain.type: unknown shape '{}'", type));
}

Oracle parse_oracle(const std::string& name) {
  if (name == "none") return Oracle::none;
  if (name == "isotropic_ball") return Oracle::isotropic_ball;
  if (name == "boundary_minimization") return Oracle::boundary_minimization;
  throw ConfigError(fmt::format("thresholds.oracle: unknown oracle '{}'", name));
}

std::optional<double> opt_double(const Json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

FieldFormat parse_field_format(const std::string& name) {
  if (name == "csv") return FieldFormat::csv;
  if (name == "binary") return FieldFormat::binary;
  throw ConfigError(fmt::format("unknown field format '{}' (expected csv or binary)", name));
}

RunConfig parse_config(const Json& j) {
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig c;
    if (!j.contains("seed")) throw ConfigError("seed: required");
    c.seed = j.at("seed").get<std::uint64_t>();
    c.output_dir = get_or<std::string>(j, "output", "out");
    c.threads = get_or(j, "threads", 1);
    c.field_format = parse_field_format(get_or<std::string>(j, "field_format", "csv"));
    if (j.contains("grid")) c.grid = parse_grid(j.at("grid"));
    if (j.contains("domain")) c.shape = parse_shape(j.at("domain"));
    if (!j.contains("model")) throw ConfigError("model: required");
    c.model = parse_model(j.at("model"), c.grid);
    c.model.field.seed = c.seed;
    c.model.numeric.seed = c.seed;

    if (j.contains("solver")) {
      const Json& s = j.at("solver");
      SolverParams p;
      p.direction_count = get_or(s, "direction_count", p.direction_count);
      p.tolerance = get_or(s, "tolerance", p.tolerance);
      p.max_sweeps = get_or(s, "max_sweeps", p.max_sweeps);
      p.refine = get_or(s, "refine", p.refine);
      p.refine_iters = get_or(s, "refine_iters", p.refine_iters);
      c.solver = p;
    }
    if (j.contains("field")) c.field_path = j.at("field").get<std::string>();
    c.level_sets = get_or(j, "level_sets", std::vector<double>{});

    if (j.contains("trajectories")) {
      int k = 0;
      for (const auto& t : j.at("trajectories")) {
        TraceRequest r;
        r.x0 = get_vec2(t.at("x0"), fmt::format("trajectories[{}].x0", k++));
        r.dt = get_or(t, "dt", 0.0);
        r.mode = parse_trace_mode(get_or<std::string>(t, "mode", "dpp"));
        c.traces.push_back(r);
      }
    }

    if (j.contains("probe")) {
      const Json& p = j.at("probe");
      ProbeConfig pc;
      if (p.at("radii").is_array()) {
        pc.spec.radii = p.at("radii").get<std::vector<double>>();
      } else {
        const Json& r = p.at("radii");
        pc.spec.radii = log_radii(r.at("min").get<double>(), r.at("max").get<double>(), r.at("count").get<int>());
      }
      pc.spec.point_count = get_or(p, "point_count", pc.spec.point_count);
      pc.spec.direction_count = get_or(p, "direction_count", pc.spec.direction_count);
      pc.spec.interior_margin = get_or(p, "interior_margin", pc.spec.interior_margin);
      pc.spec.seed = c.seed;
      pc.window.scale_min = get_or(p, "window_min", pc.spec.radii.front());
      pc.window.scale_max = get_or(p, "window_max", pc.spec.radii.back());
      pc.window.noise_floor = get_or(p, "noise_floor", 0.0);
      c.probe = pc;
    }

    if (j.contains("audit")) {
      const Json& a = j.at("audit");
      if (a.contains("domain")) c.audit.domain = get_box(a.at("domain"), "audit.domain");
      c.audit.sample_count = get_or(a, "sample_count", c.audit.sample_count);
      c.audit.samples_per_lemma = get_or(a, "samples_per_lemma", c.audit.samples_per_lemma);
      c.audit.tolerance = get_or(a, "tolerance", c.audit.tolerance);
      c.audit.gradient_duality = get_or(a, "gradient_duality", c.audit.gradient_duality);
    }

    if (j.contains("thresholds")) {
      const Json& t = j.at("thresholds");
      c.thresholds.oracle = parse_oracle(get_or<std::string>(t, "oracle", "none"));
      c.thresholds.oracle_max_spacings = opt_double(t, "oracle_max_spacings");
      c.thresholds.dpp_max_spacings = opt_double(t, "dpp_max_spacings");
      c.thresholds.velocity_holder_min = opt_double(t, "velocity_holder_min");
      c.thresholds.midpoint_defect_min = opt_double(t, "midpoint_defect_min");
      c.thresholds.chord_defect_min = opt_double(t, "chord_defect_min");
      c.thresholds.theta_min = opt_double(t, "theta_min");
      c.thresholds.require_converged = get_or(t, "require_converged", true);
    }
    return c;
  } catch (const Json::exception& e) {
    throw ConfigError(fmt::format("config: {}", e.what()));
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(fmt::format("config '{}': {}", path.string(), e.what()));
  }
  return parse_config(j);
}

HamiltonianModel build_model(const ModelConfig& config) {
  const HamiltonianModel closed = make_matrix_field_model(config.field, config.constants);
  if (!config.numeric_fallback) return closed;
  return make_generic_model([closed](const Vec2& x, const Vec2& p) { return closed.eval_h(x, p); },
                            config.constants, config.numeric);
}

// ---------------------------------------------------------------------------

void write_field(std::ostream& out, const ValueField& u, FieldFormat format) {
  Json h;
  h["schema_version"] = kSchemaVersion;
  h["format"] = format == FieldFormat::csv ? "csv" : "binary";
  h["grid"] = {{"origin", to_json(u.grid.origin)}, {"spacing", u.grid.spacing}, {"dims", {u.grid.nx, u.grid.ny}}};
  h["mask_hash"] = fmt::format("{:016x}", u.mask.hash());
  h["params"] = {{"direction_count", u.params.direction_count},
                 {"tolerance", u.params.tolerance},
                 {"max_sweeps", u.params.max_sweeps},
                 {"refine", u.params.refine}};
  h["iterations"] = u.iterations;
  h["residual"] = json_number(u.residual);
  h["converged"] = u.converged;
  h["unreached"] = u.unreached;
  out << dump_json(h, -1) << '\n';
  if (format == FieldFormat::csv) {
    for (double v : u.values) fmt::print(out, "{:.17g}\n", v);
  } else {
    static_assert(std::endian::native == std::endian::little, "binary fields are written little-endian");
    out.write(reinterpret_cast<const char*>(u.values.data()),
              static_cast<std::streamsize>(u.values.size() * sizeof(double)));
  }
}

ValueField read_field(std::istream& in, const DomainMask& mask) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("field: missing header");
  Json h;
  try {
    h = Json::parse(line);
  } catch (const Json::exception& e) {
    throw ConfigError(fmt::format("field header: {}", e.what()));
  }
  if (h.at("mask_hash").get<std::string>() != fmt::format("{:016x}", mask.hash())) {
    throw ConfigError("field: mask hash does not match the configured domain and grid");
  }
  ValueField u;
  u.grid = mask.grid;
  u.mask = mask;
  u.iterations = h.at("iterations").get<int>();
  u.converged = h.at("converged").get<bool>();
  u.unreached = h.at("unreached").get<std::size_t>();
  u.residual = h.at("residual").is_number() ? h.at("residual").get<double>() : kInf;
  const Json& p = h.at("params");
  u.params.direction_count = p.at("direction_count").get<int>();
  u.params.tolerance = p.at("tolerance").get<double>();
  u.params.max_sweeps = p.at("max_sweeps").get<int>();
  u.params.refine = p.at("refine").get<bool>();
  u.values.resize(mask.grid.size());
  if (h.at("format").get<std::string>() == "csv") {
    for (auto& v : u.values) {
      if (!std::getline(in, line)) throw ConfigError("field: too few values");
      v = line == "inf" ? kInf : std::stod(line);
    }
  } else {
    in.read(reinterpret_cast<char*>(u.values.data()), static_cast<std::streamsize>(u.values.size() * sizeof(double)));
    if (!in) throw ConfigError("field: too few values");
  }
  return u;
}

void write_level_set_csv(std::ostream& out, const std::vector<Polyline>& lines) {
  out << "poly_id,vertex_index,x,y\n";
  for (std::size_t p = 0; p < lines.size(); ++p) {
    for (std::size_t v = 0; v < lines[p].size(); ++v) {
      fmt::print(out, "{},{},{:.17g},{:.17g}\n", p, v, lines[p][v].x(), lines[p][v].y());
    }
  }
}

}  // namespace hjlab
