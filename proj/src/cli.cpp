#include "anosov/cli.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "anosov/cohomology.hpp"
#include "anosov/error.hpp"
#include "anosov/io.hpp"
#include "anosov/periodic.hpp"
#include "anosov/suspension.hpp"

namespace anosov {

namespace {

const std::vector<std::string> kOverrideKeys = {"n-min", "n-max", "trunc-eps", "tail-eps",
                                                "depth", "max-period", "grid", "precision"};

const std::map<std::string, std::string> kOverrideHelp = {
    {"n-min", "Smallest return count n"},
    {"n-max", "Largest return count n"},
    {"trunc-eps", "Fourier truncation threshold"},
    {"tail-eps", "Series tail threshold"},
    {"depth", "Pseudo-orbit depth for the splitting"},
    {"max-period", "Largest period examined"},
    {"grid", "Grid size (residual grid or family grid)"},
    {"precision", "double or extended"}};

class Overrides {
 public:
  explicit Overrides(const std::map<std::string, std::string>& raw) : raw_(raw) {
    for (const auto& [key, value] : raw_) {
      if (std::find(kOverrideKeys.begin(), kOverrideKeys.end(), key) == kOverrideKeys.end()) {
        throw Error(ErrorCode::SchemaError, "unknown override '" + key + "'");
      }
    }
  }

  int integer(const std::string& key, int fallback) const {
    const auto it = raw_.find(key);
    if (it == raw_.end()) return fallback;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(it->second, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != it->second.size()) {
      throw Error(ErrorCode::SchemaError, "--" + key + " expects an integer");
    }
    return v;
  }

  double real(const std::string& key, double fallback) const {
    const auto it = raw_.find(key);
    if (it == raw_.end()) return fallback;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(it->second, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != it->second.size() || !(v > 0.0)) {
      throw Error(ErrorCode::SchemaError, "--" + key + " expects a positive number");
    }
    return v;
  }

  bool has(const std::string& key) const { return raw_.count(key) > 0; }

  Precision precision() const {
    const auto it = raw_.find("precision");
    return it == raw_.end() ? Precision::Double : precision_from_string(it->second);
  }

 private:
  const std::map<std::string, std::string>& raw_;
};

Json header(const std::string& command) {
  return {{"schema_version", kSchemaVersion}, {"command", command}};
}

Json automorphism_json(const ToralAutomorphism& t) {
  return {{"matrix", to_json(t.matrix)},
          {"trace", t.trace},
          {"small_eig", t.small_eig},
          {"large_eig", t.large_eig},
          {"e_s", to_json(t.e_s)},
          {"e_u", to_json(t.e_u)}};
}

Json moduli_json(const std::array<double, 4>& m) { return Json::array({m[0], m[1], m[2], m[3]}); }

std::unique_ptr<DynamicalMap> build_map(const SystemSpec& s, const TrigMap& phi) {
  SkewProduct base(hyperbolic_eigen(s.a), hyperbolic_eigen(s.b), phi);
  if (s.bumps.empty()) return std::make_unique<SkewProduct>(std::move(base));
  return std::make_unique<PerturbedMap>(std::move(base), s.bumps);
}

TrigMap cohomology_datum(const SystemSpec& s) {
  if (s.g) return *s.g;
  if (s.phi1) return *s.phi1 - s.phi;
  throw Error(ErrorCode::SchemaError, "cohomology input needs 'g' or 'phi1'");
}

ExpansionOptions expansion_options(const Overrides& o) {
  ExpansionOptions e;
  e.shadowing.precision = o.precision();
  e.tail_eps = o.real("tail-eps", e.tail_eps);
  return e;
}

std::string cmd_eigen(const Json& in) {
  expect_keys(in, {"schema_version", "description", "A", "B", "phi", "phi1", "g", "bumps"}, "eigen input");
  Json out = header("eigen");
  const ToralAutomorphism a = hyperbolic_eigen(int_matrix_from_json(in.at("A")));
  out["A"] = automorphism_json(a);
  if (in.contains("B")) {
    const ToralAutomorphism b = hyperbolic_eigen(int_matrix_from_json(in.at("B")));
    out["B"] = automorphism_json(b);
    out["holder_alpha"] = std::log(b.small_eig) / std::log(a.small_eig);
  }
  return dump_json(out);
}

std::string cmd_cohomology(const Json& in, const Overrides& o) {
  const SystemSpec s = system_from_json(in);
  const auto a = hyperbolic_eigen(s.a);
  const auto b = hyperbolic_eigen(s.b);
  CohomologyOptions opts;
  opts.trunc_eps = o.real("trunc-eps", opts.trunc_eps);
  opts.residual_grid = o.integer("grid", opts.residual_grid);
  const CohomologySolution sol = solve_cohomology(a, b, cohomology_datum(s), opts);
  Json out = header("cohomology");
  out["residual_sup"] = sol.residual_sup;
  out["residual_grid"] = opts.residual_grid;
  out["truncation_eps"] = sol.truncation_eps;
  out["transported_terms"] = sol.transported_terms;
  out["predicted_alpha"] = sol.predicted_alpha;
  out["psi"] = to_json(sol.psi);
  out["psi_eigen_modes"] = modes_json(sol.psi_eigen);
  return dump_json(out);
}

std::string cmd_holder(const Json& in, const Overrides& o) {
  const SystemSpec s = system_from_json(in);
  const auto a = hyperbolic_eigen(s.a);
  const auto b = hyperbolic_eigen(s.b);
  CohomologyOptions opts;
  opts.trunc_eps = o.real("trunc-eps", opts.trunc_eps);
  const CohomologySolution sol = solve_cohomology(a, b, cohomology_datum(s), opts);
  Json out = header("holder");
  out["predicted_alpha"] = sol.predicted_alpha;
  Json estimates = Json::array();
  for (HolderMethod m : {HolderMethod::Increments, HolderMethod::FourierDecay}) {
    const HolderEstimate e = estimate_holder(sol.psi, m, a);
    estimates.push_back({{"method", to_string(m)},
                         {"alpha_hat", e.alpha_hat},
                         {"fit_r2", e.fit_r2},
                         {"scale_range", Json::array({e.scale_range.first, e.scale_range.second})},
                         {"points", e.scales.size()},
                         {"saturated", e.saturated},
                         {"trusted", e.trusted}});
  }
  out["estimates"] = estimates;
  return dump_json(out);
}

std::string cmd_periodic(const Json& in, const Overrides& o) {
  const SystemSpec s = system_from_json(in);
  const auto f = build_map(s, s.phi);
  const int max_period = o.integer("max-period", 3);
  if (max_period < 1) throw Error(ErrorCode::SchemaError, "--max-period must be >= 1");
  Json out = header("periodic");
  out["c1_norm_bound"] = f->c1_norm_bound();
  Json counts = Json::array();
  for (int n = 1; n <= max_period; ++n) {
    const CountReport r = count_periodic_points(*f, n);
    counts.push_back({{"period", r.period},
                      {"expected", r.expected},
                      {"found", r.found},
                      {"newton_solves", r.newton_solves},
                      {"max_residual", r.max_residual}});
  }
  out["counts"] = counts;

  // splitting and center class along the fixed points
  SplittingOptions sopts;
  sopts.depth = o.integer("depth", sopts.depth);
  Json fixed = Json::array();
  for (const auto& orbit : prime_linear_orbits(f->base().a(), f->base().b(), 1)) {
    const PeriodicOrbit p = find_periodic_orbit(*f, orbit.front().to_real(), 1);
    const SplittingFrame frame = compute_splitting(*f, p.points[0], sopts);
    fixed.push_back({{"point", to_json(p.points[0])},
                     {"eigmoduli", moduli_json(p.eigmoduli)},
                     {"center_class", to_string(p.center_class)},
                     {"residual", p.residual},
                     {"e_ss", to_json(frame.e_ss)},
                     {"e_ws", to_json(frame.e_ws)},
                     {"e_wu", to_json(frame.e_wu)},
                     {"e_uu", to_json(frame.e_uu)},
                     {"rates", moduli_json(frame.rates)},
                     {"depth_used", frame.depth_used}});
  }
  out["fixed_points"] = fixed;
  return dump_json(out);
}

std::string cmd_spectra(const Json& in, const Overrides& o) {
  const SystemSpec s = system_from_json(in);
  const int max_period = o.integer("max-period", 4);
  if (max_period < 1) throw Error(ErrorCode::SchemaError, "--max-period must be >= 1");
  Json out = header("spectra");
  SpectraComparison cmp;
  if (s.bumps.empty()) {
    if (!s.phi1) throw Error(ErrorCode::SchemaError, "spectra input needs 'phi1' or 'bumps'");
    const auto a = hyperbolic_eigen(s.a);
    const auto b = hyperbolic_eigen(s.b);
    CohomologyOptions opts;
    opts.trunc_eps = o.real("trunc-eps", opts.trunc_eps);
    const ConjugacyMap h = build_conjugacy(s.phi, *s.phi1, a, b, opts);
    const SkewProduct f(a, b, s.phi);
    const SkewProduct g(a, b, *s.phi1);
    out["matcher"] = to_string(Matcher::Conjugacy);
    cmp = compare_spectra(f, g, Matcher::Conjugacy, max_period, &h);
  } else {
    const auto f = build_map(SystemSpec{s.a, s.b, s.phi, {}, {}, {}}, s.phi);
    const auto g = build_map(s, s.phi);
    out["matcher"] = to_string(Matcher::Continuation);
    cmp = compare_spectra(*f, *g, Matcher::Continuation, max_period);
  }
  out["max_period"] = max_period;
  out["periods_checked"] = cmp.periods_checked;
  out["max_gap"] = cmp.max_gap;
  Json pairs = Json::array();
  for (const auto& p : cmp.pairs) {
    pairs.push_back({{"period", p.orbit_f.period_n},
                     {"point_f", to_json(p.orbit_f.points[0])},
                     {"point_g", to_json(p.orbit_g.points[0])},
                     {"moduli_f", moduli_json(p.orbit_f.eigmoduli)},
                     {"moduli_g", moduli_json(p.orbit_g.eigmoduli)},
                     {"center_class_f", to_string(p.orbit_f.center_class)},
                     {"center_class_g", to_string(p.orbit_g.center_class)},
                     {"max_relative_eig_gap", p.max_relative_eig_gap}});
  }
  out["pairs"] = pairs;
  return dump_json(out);
}

std::string cmd_suspension(const Json& in, const Overrides& o) {
  const SystemSpec s = system_from_json(in);
  const auto f = build_map(s, s.phi);
  const int max_period = o.integer("max-period", 3);
  if (max_period < 1) throw Error(ErrorCode::SchemaError, "--max-period must be >= 1");
  const SuspensionConfig cfg = make_suspension(*f);
  CsvTable csv;
  csv.header = {"period", "x1", "x2", "y1", "y2", "flow_period", "exact_period", "error_bound", "center_class"};
  for (int n = 1; n <= max_period; ++n) {
    for (const auto& orbit : prime_linear_orbits(f->base().a(), f->base().b(), n)) {
      std::vector<Eigen::Vector4d> guess;
      for (const auto& p : orbit) guess.push_back(p.to_real());
      const PeriodicOrbit p = find_periodic_orbit(*f, guess);
      const FlowPeriodicOrbit c = flow_period(cfg, p, SumMode::Compensated);
      const FlowPeriodicOrbit e = flow_period(cfg, p, SumMode::Exact);
      const Eigen::Vector4d& z = p.points[0];
      csv.add_row({std::to_string(n), format_double(z(0)), format_double(z(1)), format_double(z(2)),
                   format_double(z(3)), format_double(c.flow_period), format_double(e.exact_period.value()),
                   format_double(c.error_bound), to_string(p.center_class)});
    }
  }
  return csv.str();
}

std::string cmd_expansion(const Json& in, const Overrides& o, std::string& summary) {
  const LocalModel m = local_model_from_json(in);
  const int n_min = o.integer("n-min", 15);
  const int n_max = o.integer("n-max", 45);
  const ExpansionReport r = expansion_experiment(m, n_min, n_max, expansion_options(o));
  CsvTable csv;
  csv.header = {"n", "T_n", "omega_hat_n", "residual"};
  for (std::size_t k = 0; k < r.n.size(); ++k) {
    csv.add_row({std::to_string(r.n[k]), format_double(r.periods[k]), format_double(r.omega_hats[k]),
                 format_double(r.residuals[k])});
  }
  Json s = header("expansion");
  s["n_min"] = r.n_min;
  s["n_max"] = r.n_max;
  s["omega_fit"] = r.omega_fit;
  s["omega_closed"] = r.omega_closed;
  s["relative_gap"] = r.relative_gap();
  s["t_ws"] = r.t_ws;
  s["P_p"] = r.P_p;
  s["xi_inf"] = r.xi_inf;
  s["residual_rate"] = r.residual_rate;
  s["theta"] = r.theta;
  s["gamma"] = r.gamma;
  summary = s.dump() + "\n";
  return csv.str();
}

std::string cmd_signscan(const Json& in, const Overrides& o) {
  const ModelFamily family = family_from_json(in);
  std::vector<double> grid;
  if (in.contains("grid") && !o.has("grid")) {
    for (const auto& x : in["grid"]) {
      if (!x.is_number()) throw Error(ErrorCode::SchemaError, "family grid must hold numbers");
      grid.push_back(x.get<double>());
    }
  } else {
    const int count = o.integer("grid", 11);
    if (count < 2) throw Error(ErrorCode::SchemaError, "--grid must be >= 2");
    for (int i = 0; i < count; ++i) grid.push_back(static_cast<double>(i) / (count - 1));
  }
  const SignScanReport r = family_sign_scan(family, grid, o.integer("n-min", 15), o.integer("n-max", 45),
                                            expansion_options(o));
  Json out = header("signscan");
  Json rows = Json::array();
  for (std::size_t i = 0; i < r.s.size(); ++i) {
    rows.push_back({{"s", r.s[i]},
                    {"xi_inf", r.xi_inf[i]},
                    {"zeta", r.zeta[i]},
                    {"omega", r.omega[i]},
                    {"omega_sign", r.omega_sign[i]},
                    {"xi_sign", r.xi_sign[i]}});
  }
  auto crossings = [](const std::vector<Crossing>& c) {
    Json a = Json::array();
    for (const auto& x : c) a.push_back(Json::array({x.s_lo, x.s_hi}));
    return a;
  };
  out["members"] = rows;
  out["zero_tol"] = r.zero_tol;
  out["omega_crossings"] = crossings(r.omega_crossings);
  out["xi_crossings"] = crossings(r.xi_crossings);
  out["consistent"] = r.consistent;
  return dump_json(out);
}

std::string cmd_coarse_check(const Json& in, const Overrides& o) {
  expect_keys(in, {"schema_version", "description", "model", "shears"}, "coarse-check input");
  if (!in.contains("model") || !in.contains("shears") || !in["shears"].is_array()) {
    throw Error(ErrorCode::SchemaError, "coarse-check input needs 'model' and a 'shears' array");
  }
  const LocalModel m = local_model_from_json(in["model"]);
  const ExpansionOptions opts = expansion_options(o);
  const ExpansionReport e = expansion_experiment(m, o.integer("n-min", 15), o.integer("n-max", 45), opts);
  Json out = header("coarse-check");
  out["omega_fit"] = e.omega_fit;
  out["zeta"] = e.t_ws - e.P_p;
  out["xi_inf"] = e.xi_inf;
  Json reports = Json::array();
  bool all = true;
  for (const auto& sj : in["shears"]) {
    const CoarseChartReport r = coarse_chart_check(m, shear_from_json(sj), e.omega_fit, opts.tail_eps);
    all = all && r.agree;
    reports.push_back({{"shear", r.shear},
                       {"xi_inf_circ", r.xi_inf_circ},
                       {"t_ws_hat", r.t_ws_hat},
                       {"P_hat", r.P_hat},
                       {"zeta_hat", r.zeta_hat},
                       {"xi_scale", r.xi_scale},
                       {"chart_sign", r.chart_sign},
                       {"omega_sign", r.omega_sign},
                       {"agree", r.agree}});
  }
  out["shears"] = reports;
  out["all_agree"] = all;
  return dump_json(out);
}

void error_record(std::ostream& err, const std::string& code, bool numerical, const std::string& msg) {
  const Json rec = {{"schema_version", kSchemaVersion},
                    {"error", code},
                    {"category", numerical ? "numerical" : "validation"},
                    {"message", msg}};
  err << rec.dump() << "\n";
}

}  // namespace

const std::vector<std::string>& cli_commands() {
  static const std::vector<std::string> commands = {"eigen",      "cohomology", "holder",
                                                    "periodic",   "spectra",    "suspension",
                                                    "expansion",  "signscan",   "coarse-check"};
  return commands;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const Overrides o(config.overrides);
    const auto& cmds = cli_commands();
    if (std::find(cmds.begin(), cmds.end(), config.command) == cmds.end()) {
      throw Error(ErrorCode::SchemaError, "unknown command '" + config.command + "'");
    }
    const Json in = read_json_file(config.input_path);
    std::string report;
    std::string summary;
    const std::string& c = config.command;
    if (c == "eigen") report = cmd_eigen(in);
    else if (c == "cohomology") report = cmd_cohomology(in, o);
    else if (c == "holder") report = cmd_holder(in, o);
    else if (c == "periodic") report = cmd_periodic(in, o);
    else if (c == "spectra") report = cmd_spectra(in, o);
    else if (c == "suspension") report = cmd_suspension(in, o);
    else if (c == "expansion") report = cmd_expansion(in, o, summary);
    else if (c == "signscan") report = cmd_signscan(in, o);
    else report = cmd_coarse_check(in, o);

    if (config.output_path.empty()) {
      out << report;
    } else {
      write_text_file(config.output_path, report);
    }
    out << summary;
    return 0;
  } catch (const Error& e) {
    error_record(err, std::string(to_string(e.code())), is_numerical(e.code()), e.what());
    return is_numerical(e.code()) ? 3 : 2;
  } catch (const nlohmann::json::exception& e) {
    error_record(err, "SchemaError", false, e.what());
    return 2;
  }
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical experiments on skew products of toral automorphisms and a local flow model"};
  RunConfig cfg;
  app.add_option("command", cfg.command, "Command to run")->required()->check(CLI::IsMember(cli_commands()));
  app.add_option("--input", cfg.input_path, "Input JSON file")->required();
  app.add_option("--output", cfg.output_path, "Report file (default: standard output)");
  std::map<std::string, std::string> values;
  for (const auto& key : kOverrideKeys) {
    app.add_option("--" + key, values[key], kOverrideHelp.at(key));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    error_record(err, "SchemaError", false, e.what());
    return 2;
  }
  for (const auto& key : kOverrideKeys) {
    if (app.count("--" + key) > 0) cfg.overrides[key] = values[key];
  }
  return run(cfg, out, err);
}

}  // namespace anosov
