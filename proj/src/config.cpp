#include "npga/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace npga {

namespace {

void require_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw config_error(where + ": expected an object");
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      throw config_error(where + ": unknown field '" + item.key() + "'");
}

template <typename T>
T require_field(const json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) throw config_error(where + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw config_error(where + ": field '" + key + "' has the wrong type");
  }
}

template <typename T>
T optional_field(const json& obj, const std::string& where, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw config_error(where + ": field '" + key + "' has the wrong type");
  }
}

Dataset resolve_dataset(const json& data, std::optional<std::uint64_t> seed_override,
                        bool full_row_rank) {
  require_keys(data, "problem.data", {"synthetic", "csv"});
  if (data.contains("synthetic") == data.contains("csv"))
    throw config_error("problem.data: exactly one of 'synthetic' or 'csv' is required");
  if (data.contains("synthetic")) {
    const json& syn = data.at("synthetic");
    require_keys(syn, "problem.data.synthetic", {"p", "d", "cond", "seed", "scale"});
    const int p = require_field<int>(syn, "problem.data.synthetic", "p");
    const int d = require_field<int>(syn, "problem.data.synthetic", "d");
    const double cond = optional_field<double>(syn, "problem.data.synthetic", "cond", 10.0);
    const double scale = optional_field<double>(syn, "problem.data.synthetic", "scale", 1.0);
    std::uint64_t seed = optional_field<std::uint64_t>(syn, "problem.data.synthetic", "seed", 0);
    if (seed_override) seed = *seed_override;
    Dataset out = synthesize_dataset(p, d, cond, seed, full_row_rank);
    if (scale != 1.0) {
      out.x *= scale;
      out.y *= scale;
    }
    return out;
  }
  const json& csv = data.at("csv");
  require_keys(csv, "problem.data.csv", {"path", "standardize", "add_intercept"});
  const std::string path = require_field<std::string>(csv, "problem.data.csv", "path");
  return load_csv_dataset(path, optional_field<bool>(csv, "problem.data.csv", "standardize", true),
                          optional_field<bool>(csv, "problem.data.csv", "add_intercept", true));
}

Problem resolve_problem(const json& spec, std::optional<std::uint64_t> seed_override) {
  require_keys(spec, "problem",
               {"kind", "data", "partition", "radius", "radius_scale", "rho", "alpha_reg", "eps_reg"});
  const std::string kind = require_field<std::string>(spec, "problem", "kind");
  if (!spec.contains("data")) throw config_error("problem: missing field 'data'");
  Dataset data = resolve_dataset(spec.at("data"), seed_override, kind != "logistic");
  const auto partition = require_field<std::vector<int>>(spec, "problem", "partition");

  if (kind == "ridge") {
    double radius;
    if (spec.contains("radius")) {
      radius = require_field<double>(spec, "problem", "radius");
    } else {
      const double scale = optional_field<double>(spec, "problem", "radius_scale", 0.1);
      radius = scale * data.y.norm();
    }
    return build_ridge_problem(data.x, data.y, partition, radius);
  }
  if (kind == "logistic") {
    const double rho = optional_field<double>(spec, "problem", "rho", 0.1);
    const double eps_reg = optional_field<double>(spec, "problem", "eps_reg", 0.0);
    VectorXd labels(data.y.size());
    for (Eigen::Index i = 0; i < data.y.size(); ++i) labels(i) = data.y(i) >= 0.0 ? 1.0 : -1.0;
    return build_logistic_problem(data.x, labels, partition, rho, eps_reg);
  }
  if (kind == "elastic_net") {
    const double alpha_reg = optional_field<double>(spec, "problem", "alpha_reg", 1.0);
    const double rho = optional_field<double>(spec, "problem", "rho", 0.5);
    return build_elastic_net_problem(data.x, data.y, partition, alpha_reg, rho);
  }
  throw config_error("problem.kind must be one of ridge | logistic | elastic_net");
}

double default_theta(RateCase which) {
  return (which == RateCase::Case1 || which == RateCase::Case1ATC) ? 1.0 : 0.0;
}

}  // namespace

Experiment resolve_experiment(const json& config, bool force,
                              std::optional<std::uint64_t> seed_override) {
  require_keys(config, "config",
               {"problem", "graph", "scheme", "steps", "engine", "max_iters", "stop_gap", "output"});
  Experiment exp;
  exp.force = force;

  if (!config.contains("problem")) throw config_error("config: missing field 'problem'");
  try {
    exp.problem = resolve_problem(config.at("problem"), seed_override);
  } catch (const config_error&) {
    throw;
  } catch (const std::exception& err) {
    throw config_error(std::string("problem: ") + err.what());
  }
  if (exp.problem.mu <= 0.0)
    exp.warnings.push_back("problem has mu = 0: strong convexity is lost and no case certifies it");

  const json& graph_spec = config.contains("graph") ? config.at("graph") : json::object();
  require_keys(graph_spec, "graph", {"n", "prob", "seed", "c", "file"});
  const double mix_c = optional_field<double>(graph_spec, "graph", "c", 1.0);
  if (graph_spec.contains("file")) {
    exp.graph = read_graph_file(require_field<std::string>(graph_spec, "graph", "file"));
  } else {
    const int n = require_field<int>(graph_spec, "graph", "n");
    const double prob = optional_field<double>(graph_spec, "graph", "prob", 0.3);
    std::uint64_t seed = optional_field<std::uint64_t>(graph_spec, "graph", "seed", 0);
    if (seed_override) seed = *seed_override;
    int attempts = 0;
    try {
      exp.graph = erdos_renyi_connected(n, prob, seed, &attempts);
    } catch (const std::exception& err) {
      throw config_error(std::string("graph: ") + err.what());
    }
    if (attempts > 1)
      exp.warnings.push_back("graph: resampled " + std::to_string(attempts) +
                             " times to reach a connected draw");
  }
  if (exp.graph.n != exp.problem.n_agents()) {
    std::ostringstream msg;
    msg << "graph.n = " << exp.graph.n << " but the problem has " << exp.problem.n_agents()
        << " agents (logistic adds one slack agent)";
    throw config_error(msg.str());
  }
  if (!is_connected(exp.graph)) throw config_error("graph: topology must be connected");
  exp.mixing = mixing_matrix_laplacian(exp.graph, mix_c);

  if (!config.contains("scheme")) throw config_error("config: missing field 'scheme'");
  const json& scheme_spec = config.at("scheme");
  require_keys(scheme_spec, "scheme", {"name", "c_param", "w_prime"});
  const std::string scheme_name = require_field<std::string>(scheme_spec, "scheme", "name");
  const double c_param = optional_field<double>(scheme_spec, "scheme", "c_param", 1.0);
  const bool w_prime = optional_field<bool>(scheme_spec, "scheme", "w_prime", false);
  if (!is_known_scheme(scheme_name)) throw config_error("scheme: unknown name '" + scheme_name + "'");

  if (!config.contains("steps")) throw config_error("config: missing field 'steps'");
  const json& steps_spec = config.at("steps");
  require_keys(steps_spec, "steps", {"auto", "safety", "alpha", "beta", "gamma", "theta", "case"});
  const bool auto_steps = steps_spec.contains("auto");
  const bool is_dlm = canonical_scheme_name(scheme_name) == "NPGA-DLM";

  auto build = [&](std::optional<double> beta) {
    return build_scheme(scheme_name, exp.mixing, c_param, beta, w_prime);
  };

  if (auto_steps) {
    if (is_dlm)
      throw config_error(
          "steps.auto is unsupported for NPGA-DLM: beta enters the scheme matrices, give explicit steps");
    exp.scheme = build(std::nullopt);
    exp.certified_case = rate_case_from_string(require_field<std::string>(steps_spec, "steps", "auto"));
    const double safety = optional_field<double>(steps_spec, "steps", "safety", 0.9);
    double theta = optional_field<double>(steps_spec, "steps", "theta",
                                          exp.scheme.pinned_theta.value_or(default_theta(*exp.certified_case)));
    try {
      exp.steps = suggest_steps(*exp.certified_case, exp.problem, exp.scheme, theta, safety);
    } catch (const assumption_error& err) {
      if (!force) throw;
      exp.warnings.push_back(std::string("forced past failed case assumptions: ") + err.what());
      exp.steps = suggest_steps_unchecked(*exp.certified_case, exp.problem, exp.scheme, theta, safety);
    }
    if (exp.scheme.pinned_gamma && *exp.scheme.pinned_gamma != exp.steps.gamma) {
      exp.warnings.push_back(exp.scheme.name + " pins gamma = " +
                             std::to_string(*exp.scheme.pinned_gamma) +
                             ", overriding the suggested value");
      exp.steps.gamma = *exp.scheme.pinned_gamma;
    }
  } else {
    for (const char* key : {"alpha", "beta", "gamma"})
      if (!steps_spec.contains(key))
        throw config_error(std::string("steps: missing field '") + key + "' (or use steps.auto)");
    exp.steps.alpha = require_field<double>(steps_spec, "steps", "alpha");
    exp.steps.beta = require_field<double>(steps_spec, "steps", "beta");
    exp.steps.gamma = require_field<double>(steps_spec, "steps", "gamma");
    exp.scheme = build(is_dlm ? std::optional<double>(exp.steps.beta) : std::nullopt);
    exp.steps.theta = optional_field<double>(steps_spec, "steps", "theta",
                                             exp.scheme.pinned_theta.value_or(0.0));
    if (steps_spec.contains("case"))
      exp.certified_case = rate_case_from_string(require_field<std::string>(steps_spec, "steps", "case"));
  }
  try {
    validate_steps(exp.steps);
  } catch (const std::exception& err) {
    throw config_error(std::string("steps: ") + err.what());
  }
  for (const auto& w : exp.scheme.warnings) exp.warnings.push_back(w);

  // Assumption 4 is the framework-level requirement for any run.
  const AssumptionReport rep = check_assumptions(exp.scheme);
  if (!rep.a4()) {
    std::string what = "Assumption 4 fails for " + exp.scheme.name;
    if (!force) throw assumption_error(what + " (use force to run anyway)");
    exp.warnings.push_back(what + ", forced");
  }

  if (exp.certified_case) {
    try {
      exp.certificate = rate_certificate(*exp.certified_case, exp.problem, exp.scheme, exp.steps);
    } catch (const assumption_error& err) {
      if (!force && !auto_steps) throw;
      exp.warnings.push_back(std::string("certificate omitted: ") + err.what());
    } catch (const std::domain_error& err) {
      exp.warnings.push_back(std::string("certificate omitted: ") + err.what());
    }
  }

  exp.engine = engine_from_string(optional_field<std::string>(config, "config", "engine", "four_seq"));
  exp.max_iters = optional_field<long>(config, "config", "max_iters", 1000);
  if (exp.max_iters < 0) throw config_error("max_iters must be >= 0");
  exp.stop_gap = optional_field<double>(config, "config", "stop_gap", 0.0);

  const json& output_spec = config.contains("output") ? config.at("output") : json::object();
  require_keys(output_spec, "output", {"trace", "summary", "certificate"});
  exp.output.trace = optional_field<std::string>(output_spec, "output", "trace", "trace.csv");
  exp.output.summary = optional_field<std::string>(output_spec, "output", "summary", "summary.json");
  exp.output.certificate =
      optional_field<std::string>(output_spec, "output", "certificate", "certificate.json");

  exp.instance = json{{"problem", config.at("problem")},
                      {"graph", config.contains("graph") ? config.at("graph") : json::object()}};
  if (seed_override) exp.instance["seed_override"] = *seed_override;
  return exp;
}

Experiment resolve_experiment_text(const std::string& config_text, bool force,
                                   std::optional<std::uint64_t> seed_override) {
  json config;
  try {
    config = json::parse(config_text);
  } catch (const json::exception& err) {
    throw config_error(std::string("config is not valid JSON: ") + err.what());
  }
  return resolve_experiment(config, force, seed_override);
}

RunArtifacts run_experiment(const Experiment& experiment) {
  RunArtifacts art;
  art.oracle = solve_reference(experiment.problem);

  std::optional<FixedPoint> fp;
  std::vector<std::string> run_warnings = experiment.warnings;
  if (experiment.certificate) {
    fp = construct_fixed_point(experiment.problem, experiment.scheme, experiment.steps.beta,
                               art.oracle.x_star, art.oracle.lambda_star);
    if (fp->residuals.max() > 1e-6) {
      run_warnings.push_back("fixed point residuals above 1e-6, lyapunov column omitted");
      fp.reset();
    }
  }

  RunOptions options;
  options.engine = experiment.engine;
  options.max_iters = experiment.max_iters;
  options.stop_gap = experiment.stop_gap;
  options.x_star = art.oracle.x_star;
  if (fp && experiment.certificate) {
    options.fixed_point = &*fp;
    options.certificate = &*experiment.certificate;
  }
  art.trace = run(experiment.problem, experiment.scheme, experiment.steps, options);

  const TraceRow& last = art.trace.last();
  art.summary = json{
      {"scheme", experiment.scheme.name},
      {"engine", engine_to_string(experiment.engine)},
      {"steps", steps_to_json(experiment.steps)},
      {"iterations", last.iter},
      {"comm_rounds", last.comm_rounds},
      {"final_gap", last.gap},
      {"final_consensus_err", last.consensus_err},
      {"final_kkt", last.kkt},
      {"stop_reason", art.trace.stop_reason},
      {"diverged", art.trace.diverged},
      {"oracle",
       {{"kkt", art.oracle.kkt}, {"iterations", art.oracle.iterations}, {"converged", art.oracle.converged}}},
      {"certificate", experiment.certificate ? certificate_to_json(*experiment.certificate) : json()},
      {"warnings", run_warnings}};
  return art;
}

}  // namespace npga
