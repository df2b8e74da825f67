#ifndef HETSHRINK_CLI_HPP
#define HETSHRINK_CLI_HPP

#include "hetshrink/json_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

// Scenario-file driven commands. Each cmd_* returns a process exit code:
// 0 ok, 2 invalid configuration, 3 mathematical precondition, 4 I/O.

namespace hetshrink::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitMath = 3;
inline constexpr int kExitIo = 4;

inline constexpr const char* kRiskCurveSchema = "hetshrink.risk_curves.v1";
inline constexpr const char* kBoundsSchema = "hetshrink.bounds_table.v1";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NamedEstimator {
  std::string label;
  EstimatorSpec spec;
};

struct CurveSpec {
  std::vector<CurveKind> kinds{CurveKind::homoscedastic()};
  double eta_max = 16.0;
  int eta_steps = 17;

  std::vector<double> grid() const {
    std::vector<double> g;
    for (int i = 0; i < eta_steps; ++i) g.push_back(eta_max * i / (eta_steps - 1));
    return g;
  }
};

struct ScenarioConfig {
  VarianceConfig variance;
  PriorSpec prior;
  std::vector<NamedEstimator> estimators;
  CurveSpec curve;
  std::size_t n_rep = kDefaultReplications;
  std::uint64_t seed = 1;
  std::string output_path;
  std::optional<Vector> x;
  std::vector<double> alphas{1.0};
  std::vector<json> bound_directions{"A_dag", "identity", "inverse_variance"};
};

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline std::string default_label(const EstimatorSpec& spec) {
  std::string label = spec.name();
  if (spec.factor_version == FactorVersion::Alternative) label += ":alt";
  if (spec.prior.tag == PriorSpec::Tag::HomoscedasticInfinity) {
    label += ":gamma=inf";
  } else if (spec.prior.tag == PriorSpec::Tag::Explicit && spec.prior.gamma.size() > 0) {
    const Vector& g = spec.prior.gamma;
    if ((g.array() == g(0)).all()) {
      label += ":gamma=" + format_number(g(0));
    } else {
      label += ":gamma=custom";
    }
  }
  return label;
}

/// Parses a scenario document. Throws ConfigError on any invalid field.
inline ScenarioConfig parse_scenario(const json& j) {
  ScenarioConfig cfg;
  try {
    const json& vc = j.at("variance_config");
    if (vc.is_string()) {
      cfg.variance = variance_config(vc.get<std::string>());
    } else {
      cfg.variance = variance_config("explicit", vector_from_json(vc));
    }
    const Index p = cfg.variance.d.size();
    if (j.contains("prior")) cfg.prior = j.at("prior").get<PriorSpec>();
    if (cfg.prior.tag == PriorSpec::Tag::Explicit && cfg.prior.gamma.size() != p) {
      throw ConfigError("prior gamma length does not match p");
    }

    if (j.contains("estimators")) {
      for (const json& e : j.at("estimators")) {
        NamedEstimator ne{"", e.get<EstimatorSpec>()};
        // A scalar "gamma" parameter is shorthand for the prior gamma*I.
        if (auto g = ne.spec.parameter("gamma")) {
          ne.spec.prior = PriorSpec::homoscedastic(*g, p);
          ne.spec.parameters.erase("gamma");
        }
        if (ne.spec.prior.tag == PriorSpec::Tag::Explicit && ne.spec.prior.gamma.size() != p) {
          throw ConfigError("estimator prior length does not match p");
        }
        ne.label = e.is_object() && e.contains("label") ? e.at("label").get<std::string>()
                                                        : default_label(ne.spec);
        cfg.estimators.push_back(std::move(ne));
      }
    }
    if (cfg.estimators.empty()) throw ConfigError("estimators must be nonempty");

    if (j.contains("curve")) {
      const json& c = j.at("curve");
      if (c.contains("kind") || c.contains("kinds")) {
        cfg.curve.kinds.clear();
        const json& k = c.contains("kinds") ? c.at("kinds") : c.at("kind");
        if (k.is_string()) {
          cfg.curve.kinds.push_back(CurveKind::parse(k.get<std::string>()));
        } else {
          for (const json& s : k) cfg.curve.kinds.push_back(CurveKind::parse(s.get<std::string>()));
        }
      }
      cfg.curve.eta_max = c.value("eta_max", cfg.curve.eta_max);
      cfg.curve.eta_steps = c.value("eta_steps", cfg.curve.eta_steps);
    }
    if (!(cfg.curve.eta_max > 0.0)) throw ConfigError("curve.eta_max must be > 0");
    if (cfg.curve.eta_steps < 2) throw ConfigError("curve.eta_steps must be >= 2");
    for (const auto& k : cfg.curve.kinds) {
      if (k.type == CurveKind::Type::Axis && k.axis >= p) throw ConfigError("axis index exceeds p");
    }

    if (j.contains("n_rep")) cfg.n_rep = j.at("n_rep").get<std::size_t>();
    if (cfg.n_rep < 2) throw ConfigError("n_rep must be >= 2");
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.output_path = j.value("output_path", std::string());
    if (j.contains("x")) cfg.x = vector_from_json(j.at("x"));
    if (j.contains("alphas")) cfg.alphas = j.at("alphas").get<std::vector<double>>();
    if (j.contains("bound_directions")) cfg.bound_directions = j.at("bound_directions").get<std::vector<json>>();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return parse_scenario(j);
}

inline int cmd_solve_direction(const ScenarioConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const DirectionSolution sol = solve_direction(cfg.variance.d, cfg.prior);
    json j = to_json_value(sol);
    j["variance_config"] = cfg.variance.name;
    j["d"] = vector_to_json(cfg.variance.d);
    j["prior"] = cfg.prior;
    j["max_value_diagnostic"] = max_value_diagnostic(sol, cfg.variance.d);
    out << j.dump(2) << "\n";
    return kExitOk;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return e.code() == ErrorCode::DimensionTooSmall || e.code() == ErrorCode::NegativeCStar ? kExitMath
                                                                                            : kExitConfig;
  }
}

inline int cmd_estimate(const ScenarioConfig& cfg, const Vector& x, std::ostream& out, std::ostream& err) {
  if (x.size() != cfg.variance.d.size()) {
    err << "x has length " << x.size() << " but p = " << cfg.variance.d.size() << "\n";
    return kExitConfig;
  }
  json results = json::array();
  try {
    for (const auto& ne : cfg.estimators) {
      const Estimator est(ne.spec, cfg.variance.d);
      json r = to_json_value(est.apply(x));
      r["estimator"] = ne.label;
      r["spec"] = ne.spec;
      results.push_back(std::move(r));
    }
  } catch (const Error& e) {
    err << e.what() << "\n";
    return e.code() == ErrorCode::NegativeCStar || e.code() == ErrorCode::DimensionTooSmall ? kExitMath
                                                                                            : kExitConfig;
  }
  out << results.dump(2) << "\n";
  return kExitOk;
}

inline void write_risk_curves(const ScenarioConfig& cfg, std::ostream& out) {
  out << "# schema=" << kRiskCurveSchema << " library=hetshrink version=" << kVersion << "\n";
  out << "estimator,kind,eta,risk,se,n_rep,seed\n";
  const std::vector<double> grid = cfg.curve.grid();
  for (const auto& ne : cfg.estimators) {
    for (const auto& kind : cfg.curve.kinds) {
      const RiskCurve c = risk_curve(ne.spec, kind, cfg.variance.d, grid, cfg.n_rep, cfg.seed);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        out << ne.label << ',' << kind.name() << ',' << format_number(grid[i]) << ','
            << format_number(c.risk[i]) << ',' << format_number(c.std_err[i]) << ',' << cfg.n_rep << ','
            << cfg.seed << "\n";
      }
    }
  }
}

/// Writes to cfg.output_path, or to out when no path is configured.
inline int cmd_risk_curves(const ScenarioConfig& cfg, std::ostream& out, std::ostream& err) {
  std::ostringstream buffer;
  try {
    write_risk_curves(cfg, buffer);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return e.code() == ErrorCode::NegativeCStar || e.code() == ErrorCode::DimensionTooSmall ? kExitMath
                                                                                            : kExitConfig;
  }
  if (cfg.output_path.empty()) {
    out << buffer.str();
    return out ? kExitOk : kExitIo;
  }
  std::ofstream file(cfg.output_path, std::ios::binary);
  if (!file) {
    err << "cannot write '" << cfg.output_path << "'\n";
    return kExitIo;
  }
  file << buffer.str();
  file.flush();
  return file ? kExitOk : kExitIo;
}

struct BoundRow {
  std::string name;
  std::string direction;
  std::optional<double> value;
  std::string assumptions;
};

inline std::pair<std::string, Vector> resolve_bound_direction(const json& j, const Vector& d, const PriorSpec& prior) {
  if (!j.is_string()) return {"explicit", vector_from_json(j)};
  const std::string s = j.get<std::string>();
  if (s == "A_dag") return {s, solve_direction(d, prior).a_dag};
  if (s == "A_dag0") return {s, solve_direction(d, PriorSpec::zero()).a_dag};
  if (s == "A_dagInf") return {s, solve_direction(d, PriorSpec::homoscedastic_infinity()).a_dag};
  if (s == "identity") return {s, Vector::Ones(d.size())};
  if (s == "inverse_variance") return {s, d.cwiseInverse()};
  throw ConfigError("unknown bound direction '" + s + "'");
}

inline std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? "; " : "") + parts[i];
  return s;
}

inline std::vector<BoundRow> bounds_rows(const ScenarioConfig& cfg) {
  const Vector& d = cfg.variance.d;
  std::vector<BoundRow> rows;
  auto attempt = [&](const std::string& name, const std::string& direction, auto&& fn) {
    try {
      const BoundReport r = fn();
      rows.push_back({name, direction, r.value, join(r.assumptions)});
    } catch (const Error& e) {
      rows.push_back({name, direction, std::nullopt, std::string("inapplicable: ") + to_string(e.code())});
    }
  };

  const ResolvedGamma resolved = effective_gamma(cfg.prior, d);
  if (std::holds_alternative<InfiniteHomoscedastic>(resolved)) {
    rows.push_back({"all", "", std::nullopt, "inapplicable: bounds need a finite prior"});
    return rows;
  }
  const Vector gamma = std::get<Vector>(resolved);

  for (const json& dj : cfg.bound_directions) {
    auto [dname, a] = resolve_bound_direction(dj, d, cfg.prior);
    if (a.size() != d.size()) throw ConfigError("bound direction length does not match p");
    attempt("c_star", dname, [&] { return BoundReport{"c_star", c_star_canonical(d, a), {"canonical"}}; });
    attempt("bayes_upper_bound", dname, [&] { return bayes_upper_bound(d, gamma, a); });
    attempt("worst_case_bound", dname, [&] { return worst_case_bound(d, gamma, a); });
    attempt("inverse_moment_lower_bound", dname, [&] {
      return BoundReport{"inverse_moment_lower_bound", inverse_moment_lower_bound(d, gamma, a),
                         {"p > 2", "lower bound on E(1/X'A'AX)"}};
    });
  }
  attempt("bayes_rule_risk", "", [&] { return BoundReport{"bayes_rule_risk", bayes_rule_risk(d, gamma), {"exact"}}; });
  attempt("bayes_upper_bound_dagger", "A_dag", [&] { return bayes_upper_bound_dagger(d, gamma); });
  attempt("theorem3_tight", "A_dag", [&] { return theorem3_bounds(d, gamma).tight; });
  attempt("theorem3_loose", "A_dag", [&] { return theorem3_bounds(d, gamma).loose; });
  attempt("theorem4_tight", "A_dag", [&] { return theorem4_bounds(d, gamma).tight; });
  attempt("theorem4_loose", "A_dag", [&] { return theorem4_bounds(d, gamma).loose; });
  attempt("bayes_proximity_bound", "A_dag", [&] { return bayes_proximity_bound(d, gamma); });
  for (double alpha : cfg.alphas) {
    attempt("corollary4_bound[alpha=" + format_number(alpha) + "]", "A_dag",
            [&] { return corollary4_bound(d, gamma, alpha); });
  }
  attempt("mb2_bayes_risk", "", [&] {
    return BoundReport{"mb2_bayes_risk", mb2_bayes_risk(d, gamma), {"exact Bayes risk of MB2"}};
  });
  return rows;
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

inline int cmd_bounds_table(const ScenarioConfig& cfg, std::ostream& out, std::ostream& err) {
  std::ostringstream buffer;
  try {
    buffer << "# schema=" << kBoundsSchema << " library=hetshrink version=" << kVersion << "\n";
    buffer << "name,direction,value,applicable,assumptions\n";
    for (const auto& r : bounds_rows(cfg)) {
      buffer << csv_quote(r.name) << ',' << r.direction << ',' << (r.value ? format_number(*r.value) : "")
             << ',' << (r.value ? "true" : "false") << ',' << csv_quote(r.assumptions) << "\n";
    }
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return e.code() == ErrorCode::DimensionTooSmall ? kExitMath : kExitConfig;
  }
  if (cfg.output_path.empty()) {
    out << buffer.str();
    return out ? kExitOk : kExitIo;
  }
  std::ofstream file(cfg.output_path, std::ios::binary);
  if (!file) {
    err << "cannot write '" << cfg.output_path << "'\n";
    return kExitIo;
  }
  file << buffer.str();
  file.flush();
  return file ? kExitOk : kExitIo;
}

inline Vector parse_vector_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    values.push_back(v);
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

/// Entry point behind the hetshrink executable.
inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Minimax shrinkage estimation under heteroscedastic normal means"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_rep;
  std::string out_path;
  std::string x_text;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Scenario file (JSON)")->required();
    sub->add_option("--seed", seed, "Override the scenario seed");
    sub->add_option("--n-rep", n_rep, "Override the Monte Carlo replications");
    sub->add_option("--out", out_path, "Output path (default: stdout)");
  };
  CLI::App* solve = app.add_subcommand("solve-direction", "Optimal shrinkage direction as JSON");
  CLI::App* estimate = app.add_subcommand("estimate", "Apply the configured estimators to x");
  CLI::App* curves = app.add_subcommand("risk-curves", "Monte Carlo risk curves as CSV");
  CLI::App* bounds = app.add_subcommand("bounds-table", "Closed-form risk bounds as CSV");
  for (CLI::App* sub : {solve, estimate, curves, bounds}) add_common(sub);
  estimate->add_option("--x", x_text, "Observation as a comma-separated list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitConfig;
  }

  ScenarioConfig cfg;
  try {
    cfg = load_scenario(config_path);
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::ios_base::failure& e) {
    err << e.what() << "\n";
    return kExitIo;
  }
  if (seed) cfg.seed = *seed;
  if (n_rep) {
    if (*n_rep < 2) {
      err << "--n-rep must be >= 2\n";
      return kExitConfig;
    }
    cfg.n_rep = *n_rep;
  }
  if (!out_path.empty()) cfg.output_path = out_path;

  auto emit = [&](auto&& command) {
    if (cfg.output_path.empty() || *curves || *bounds) return command(out);
    std::ostringstream buffer;
    const int code = command(buffer);
    std::ofstream file(cfg.output_path, std::ios::binary);
    if (!file) {
      err << "cannot write '" << cfg.output_path << "'\n";
      return kExitIo;
    }
    file << buffer.str();
    return file ? code : kExitIo;
  };

  if (*solve) return emit([&](std::ostream& o) { return cmd_solve_direction(cfg, o, err); });
  if (*estimate) {
    Vector x;
    try {
      if (!x_text.empty()) {
        x = parse_vector_list(x_text);
      } else if (cfg.x) {
        x = *cfg.x;
      } else {
        err << "estimate needs --x or an 'x' field in the config\n";
        return kExitConfig;
      }
    } catch (const std::exception& e) {
      err << "invalid --x: " << e.what() << "\n";
      return kExitConfig;
    }
    return emit([&](std::ostream& o) { return cmd_estimate(cfg, x, o, err); });
  }
  if (*curves) return cmd_risk_curves(cfg, out, err);
  return cmd_bounds_table(cfg, out, err);
}

}  // namespace hetshrink::cli

#endif  // HETSHRINK_CLI_HPP
