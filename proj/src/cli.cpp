#include "hjlab/cli.hpp"

#include "hjlab/parallel.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>

namespace hjlab {

namespace fs = std::filesystem;

namespace {

class MissingField : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

struct Check {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool pass = true;

  Json json() const { return {{"name", name}, {"value", json_number(value)}, {"limit", limit}, {"pass", pass}}; }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

class Session {
 public:
  explicit Session(const RunConfig& config) : c_(config) {
    std::error_code ec;
    fs::create_directories(c_.output_dir, ec);
    if (ec) throw ConfigError(fmt::format("cannot create output directory '{}': {}", c_.output_dir.string(), ec.message()));
    const fs::path fits_path = c_.output_dir / "fits.json";
    if (fs::exists(fits_path)) {
      std::ifstream in(fits_path);
      try {
        fits_ = Json::parse(in);
      } catch (const Json::exception&) {
        fits_ = Json::object();
      }
    }
    fits_["schema_version"] = kSchemaVersion;
  }

  const RunConfig& config() const { return c_; }

  const HamiltonianModel& model() {
    if (!model_) model_ = build_model(c_.model);
    return *model_;
  }

  const DomainMask& mask() {
    if (!mask_) {
      if (!c_.grid) throw ConfigError("grid: required for solve, trace and probe");
      if (!c_.shape) throw ConfigError("domain: required for solve, trace and probe");
      mask_ = build_domain(*c_.shape, *c_.grid);
    }
    return *mask_;
  }

  bool has_field_source() const { return field_ || c_.solver || c_.field_path; }

  /// The solved field: solves in-process when the config has a solver
  /// section, otherwise loads the configured field file.
  const ValueField& field() {
    if (field_) return *field_;
    if (c_.solver) {
      SolverParams p = *c_.solver;
      p.threads = c_.threads;
      field_ = solve_min_time(model(), mask(), p);
    } else if (c_.field_path) {
      std::ifstream in(*c_.field_path, std::ios::binary);
      if (!in) throw ConfigError(fmt::format("cannot open field '{}'", c_.field_path->string()));
      field_ = read_field(in, mask());
    } else {
      throw MissingField("missing value field: add a solver section or a field path to the config");
    }
    return *field_;
  }

  Json& fits() { return fits_; }
  void write_fits() { write_text(c_.output_dir / "fits.json", dump_json(fits_) + "\n"); }

 private:
  RunConfig c_;
  std::optional<HamiltonianModel> model_;
  std::optional<DomainMask> mask_;
  std::optional<ValueField> field_;
  Json fits_ = Json::object();
};

int status_of(const std::vector<Check>& checks) {
  for (const auto& c : checks) {
    if (!c.pass) return kExitThresholdFail;
  }
  return kExitPass;
}

Json checks_json(const std::vector<Check>& checks) {
  Json a = Json::array();
  for (const auto& c : checks) a.push_back(c.json());
  return a;
}

// ---------------------------------------------------------------------------

int step_audit(Session& s) {
  const RunConfig& c = s.config();
  const HamiltonianModel& model = s.model();
  AuditOptions opt = c.audit.options;
  opt.threads = c.threads;
  const AuditReport report = audit_standing_assumptions(model, c.audit.domain, c.audit.sample_count, c.seed, opt);

  LemmaSuiteSpec spec;
  spec.domain = c.audit.domain;
  spec.samples_per_lemma = c.audit.samples_per_lemma;
  spec.seed = c.seed;
  spec.scale_min = opt.scale_min;
  spec.scale_max = opt.scale_max;
  spec.threads = c.threads;
  spec.include_gradient_duality = c.audit.gradient_duality;
  std::vector<LemmaResidual> rows = run_lemma_suite(model, audited_constants(report), spec);
  for (std::size_t k = 0; k < report.worst_violations.size(); ++k) {
    const auto& w = report.worst_violations[k];
    LemmaResidual r = LemmaResidual::make("declared_" + w.inequality, w.sample, -w.residual, 0.0);
    r.sample_index = k;
    rows.push_back(std::move(r));
  }

  std::map<std::string, std::pair<std::size_t, double>> per_lemma;
  std::vector<std::string> order;
  for (const auto& r : rows) {
    auto [it, fresh] = per_lemma.try_emplace(r.lemma_id, 0, kInf);
    if (fresh) order.push_back(r.lemma_id);
    ++it->second.first;
    it->second.second = std::min(it->second.second, r.margin);
  }
  const double worst = min_margin(rows);
  const bool pass = worst >= -c.audit.tolerance;

  Json j;
  j["schema_version"] = kSchemaVersion;
  j["model"] = {{"provenance", to_string(model.provenance())}};
  j["report"] = to_json(report);
  Json lemmas = Json::array();
  for (const auto& id : order) {
    lemmas.push_back({{"lemma_id", id}, {"samples", per_lemma[id].first}, {"min_margin", per_lemma[id].second}});
  }
  j["lemmas"] = lemmas;
  j["tolerance"] = c.audit.tolerance;
  j["min_margin"] = worst;
  j["pass"] = pass;
  write_text(c.output_dir / "audit.json", dump_json(j) + "\n");
  std::ostringstream csv;
  write_residuals_csv(csv, rows);
  write_text(c.output_dir / "lemma_residuals.csv", csv.str());
  return pass ? kExitPass : kExitThresholdFail;
}

double oracle_error(Session& s, const ValueField& u, Oracle oracle) {
  const auto* ball = std::get_if<BallShape>(&*s.config().shape);
  if (!ball) throw ConfigError("thresholds.oracle: the closed-form oracles need a ball domain");
  const HamiltonianModel& model = s.model();
  std::vector<Vec2> boundary;
  if (oracle == Oracle::boundary_minimization) {
    boundary.resize(10000);
    for (int k = 0; k < 10000; ++k) boundary[k] = ball->center + ball->radius * unit_vector(2.0 * kPi * k / 10000);
  }
  const GridSpec& g = u.grid;
  std::vector<double> err(g.size(), 0.0);
  parallel_for(g.size(), s.config().threads, [&](std::size_t k) {
    if (!u.mask.inside[k]) return;
    const Vec2 x = g.node(k);
    double exact = ball->radius - (x - ball->center).norm();
    if (oracle == Oracle::boundary_minimization) {
      exact = kInf;
      for (const Vec2& y : boundary) exact = std::min(exact, model.polar(x, y - x));
    }
    err[k] = std::abs(u.values[k] - exact);
  });
  return *std::max_element(err.begin(), err.end());
}

int step_solve(Session& s) {
  const RunConfig& c = s.config();
  if (!c.solver) throw ConfigError("solver: required for solve");
  const ValueField& u = s.field();
  std::vector<Check> checks;
  Json j;
  j["spacing"] = u.grid.spacing;
  j["iterations"] = u.iterations;
  j["residual"] = json_number(u.residual);
  j["converged"] = u.converged;
  j["unreached"] = u.unreached;
  if (c.thresholds.require_converged) {
    checks.push_back({"converged", u.residual, c.solver->tolerance, u.converged && u.unreached == 0});
  }
  if (c.thresholds.oracle != Oracle::none) {
    const double e = oracle_error(s, u, c.thresholds.oracle);
    j["oracle"] = c.thresholds.oracle == Oracle::isotropic_ball ? "isotropic_ball" : "boundary_minimization";
    j["oracle_sup_error"] = e;
    j["oracle_sup_error_spacings"] = e / u.grid.spacing;
    if (c.thresholds.oracle_max_spacings) {
      const double lim = *c.thresholds.oracle_max_spacings;
      checks.push_back({"oracle_sup_error_spacings", e / u.grid.spacing, lim, e <= lim * u.grid.spacing});
    }
  }
  j["checks"] = checks_json(checks);
  s.fits()["solve"] = j;

  {
    std::ostringstream out;
    write_field(out, u, c.field_format);
    write_text(c.output_dir / "u.field", out.str());
  }
  for (double t : c.level_sets) {
    std::ostringstream out;
    write_level_set_csv(out, extract_level_set(u, t));
    write_text(c.output_dir / fmt::format("levelset_t{}.csv", t), out.str());
  }
  return status_of(checks);
}

int step_trace(Session& s) {
  const RunConfig& c = s.config();
  if (c.traces.empty()) throw ConfigError("trajectories: no trace requests");
  const HamiltonianModel& model = s.model();
  if (!s.has_field_source()) throw MissingField("missing value field: add a solver section or a field path to the config");
  for (std::size_t i = 0; i < c.traces.size(); ++i) {
    if (!shape_contains(*c.shape, c.traces[i].x0)) {
      throw ConfigError(fmt::format("trajectories[{}].x0 = ({}, {}) is outside the domain", i, c.traces[i].x0.x(),
                                    c.traces[i].x0.y()));
    }
  }
  const ValueField& u = s.field();
  const double h = u.grid.spacing;

  struct Result {
    Trajectory traj;
    Json json;
    std::vector<Check> checks;
  };
  std::vector<Result> results(c.traces.size());
  parallel_for(c.traces.size(), c.threads, [&](std::size_t i) {
    const TraceRequest& req = c.traces[i];
    TraceParams p;
    p.dt = req.dt > 0.0 ? req.dt : 2.0 * h / model.constants().r;
    p.mode = req.mode;
    Result& r = results[i];
    r.traj = trace_optimal(u, model, req.x0, p);
    const double dpp = dpp_defect(r.traj);
    Json& j = r.json;
    j["index"] = i;
    j["x0"] = to_json(req.x0);
    j["dt"] = p.dt;
    j["mode"] = to_string(req.mode);
    j["status"] = to_string(r.traj.status);
    j["samples"] = r.traj.size();
    j["dpp_defect"] = dpp;
    j["dpp_defect_spacings"] = dpp / h;
    if (c.thresholds.dpp_max_spacings) {
      r.checks.push_back({"dpp_defect_spacings", dpp / h, *c.thresholds.dpp_max_spacings,
                          dpp <= *c.thresholds.dpp_max_spacings * h});
    }
    Json fits = Json::array();
    auto add = [&](const std::string& lemma, const std::optional<double>& min, auto&& fit_fn) {
      try {
        const ExponentFit f = fit_fn();
        fits.push_back(to_json(f, lemma));
        if (min) r.checks.push_back({lemma, f.exponent, *min, f.vacuous() || f.exponent >= *min});
      } catch (const FitError& e) {
        fits.push_back({{"lemma", lemma}, {"error", e.what()}});
        if (min) r.checks.push_back({lemma, std::numeric_limits<double>::quiet_NaN(), *min, false});
      }
    };
    const FitWindow w = default_window(r.traj);
    add("velocity_holder", c.thresholds.velocity_holder_min, [&] { return velocity_holder_fit(r.traj, w); });
    add("midpoint_defect", c.thresholds.midpoint_defect_min, [&] { return midpoint_defect_fit(r.traj, w); });
    add("chord_metric_defect", c.thresholds.chord_defect_min,
        [&] { return chord_metric_defect_fit(r.traj, model, w); });
    j["fits"] = fits;
    j["checks"] = checks_json(r.checks);
  });

  Json all = Json::array();
  int status = kExitPass;
  for (std::size_t i = 0; i < results.size(); ++i) {
    std::ostringstream out;
    write_trajectory_csv(out, results[i].traj);
    write_text(c.output_dir / fmt::format("traj_{}.csv", i), out.str());
    all.push_back(results[i].json);
    status = std::max(status, status_of(results[i].checks));
  }
  s.fits()["trajectories"] = all;
  return status;
}

int step_probe(Session& s) {
  const RunConfig& c = s.config();
  if (!c.probe) throw ConfigError("probe: section required");
  if (!s.has_field_source()) throw MissingField("missing value field: add a solver section or a field path to the config");
  const ValueField& u = s.field();
  ProbeSpec spec = c.probe->spec;
  spec.threads = c.threads;
  const SecondDifferenceProfile prof = second_difference_profile(u, spec);
  std::vector<Check> checks;
  Json j;
  try {
    const SemiconcavityFit f = fit_semiconcavity_exponent(prof, c.probe->window, c.model.constants.alpha);
    j = to_json(f.fit, "semiconcavity");
    j["theta_hat"] = json_number(f.theta_hat);
    j["theta_target"] = f.theta_target;
    if (c.thresholds.theta_min) {
      checks.push_back({"theta_hat", f.theta_hat, *c.thresholds.theta_min,
                        f.vacuous() || f.theta_hat >= *c.thresholds.theta_min});
    }
  } catch (const FitError& e) {
    j = {{"lemma", "semiconcavity"}, {"error", e.what()}};
    j["theta_target"] = semiconcavity_target(c.model.constants.alpha);
    if (c.thresholds.theta_min) {
      checks.push_back({"theta_hat", std::numeric_limits<double>::quiet_NaN(), *c.thresholds.theta_min, false});
    }
  }
  j["alpha"] = c.model.constants.alpha;
  j["dropped_radii"] = prof.dropped_radii;
  j["checks"] = checks_json(checks);
  s.fits()["probe"] = j;
  std::ostringstream out;
  write_profile_csv(out, prof);
  write_text(c.output_dir / "profile.csv", out.str());
  return status_of(checks);
}

template <class Fn>
int guarded(const char* name, std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const EvaluationError& e) {
    fmt::print(err, "hjlab {}: {} (at x = ({}, {}))\n", name, e.what(), e.point.x(), e.point.y());
  } catch (const std::exception& e) {
    fmt::print(err, "hjlab {}: {}\n", name, e.what());
  }
  return kExitConfigError;
}

template <class... Steps>
int run_steps(const char* name, const RunConfig& config, std::ostream& err, Steps... steps) {
  return guarded(name, err, [&] {
    Session s(config);
    int status = kExitPass;
    ((status = std::max(status, steps(s))), ...);
    s.write_fits();
    return status;
  });
}

}  // namespace

int cmd_audit(const RunConfig& config, std::ostream& err) {
  return guarded("audit", err, [&] {
    Session s(config);
    return step_audit(s);
  });
}

int cmd_solve(const RunConfig& config, std::ostream& err) { return run_steps("solve", config, err, step_solve); }
int cmd_trace(const RunConfig& config, std::ostream& err) { return run_steps("trace", config, err, step_trace); }
int cmd_probe(const RunConfig& config, std::ostream& err) { return run_steps("probe", config, err, step_probe); }

int cmd_all(const RunConfig& config, std::ostream& err) {
  return guarded("all", err, [&] {
    Session s(config);
    int status = step_audit(s);
    if (config.solver) status = std::max(status, step_solve(s));
    if (!config.traces.empty()) status = std::max(status, step_trace(s));
    if (config.probe) status = std::max(status, step_probe(s));
    s.write_fits();
    return status;
  });
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Numerical lab for eikonal Hamilton-Jacobi equations", "hjlab"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir, field_format;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  for (const char* name : {"audit", "solve", "trace", "probe", "all"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--seed", seed, "seed (overrides the config)");
    sub->add_option("--threads", threads, "worker threads");
    sub->add_option("--field-format", field_format, "u.field format: csv or binary");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfigError;
  }

  RunConfig config;
  try {
    config = load_config(config_path);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (seed) {
      config.seed = *seed;
      config.model.field.seed = *seed;
      config.model.numeric.seed = *seed;
      if (config.probe) config.probe->spec.seed = *seed;
    }
    if (threads) config.threads = std::max(1, *threads);
    if (!field_format.empty()) config.field_format = parse_field_format(field_format);
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "hjlab: {}\n", e.what());
    return kExitConfigError;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  if (cmd == "audit") return cmd_audit(config, std::cerr);
  if (cmd == "solve") return cmd_solve(config, std::cerr);
  if (cmd == "trace") return cmd_trace(config, std::cerr);
  if (cmd == "probe") return cmd_probe(config, std::cerr);
  return cmd_all(config, std::cerr);
}

}  // namespace hjlab
