#include "npga.h"

#include "npga/config.hpp"
#include "npga/graph.hpp"
#include "npga/io.hpp"
#include "npga/version.hpp"

#include <cstring>
#include <string>

using namespace npga;

struct npga_graph {
  Graph g;
};

struct npga_experiment {
  Experiment exp;
};

struct npga_run_report {
  RunArtifacts art;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

npga_status set_error(npga_status code, const std::string& what) {
  g_last_error = what;
  return code;
}

// Maps the core exception taxonomy onto C error codes.
template <typename Fn>
npga_status guarded(Fn&& fn) {
  try {
    fn();
    return NPGA_OK;
  } catch (const config_error& err) {
    return set_error(NPGA_ERR_PARSE, err.what());
  } catch (const assumption_error& err) {
    return set_error(NPGA_ERR_ASSUMPTION, err.what());
  } catch (const std::invalid_argument& err) {
    return set_error(NPGA_ERR_INVALID_ARG, err.what());
  } catch (const std::domain_error& err) {
    return set_error(NPGA_ERR_INVALID_ARG, err.what());
  } catch (const std::runtime_error& err) {
    return set_error(NPGA_ERR_NUMERIC, err.what());
  } catch (const std::exception& err) {
    return set_error(NPGA_ERR_INTERNAL, err.what());
  } catch (...) {
    return set_error(NPGA_ERR_INTERNAL, "unknown error");
  }
}

npga_status validate_on_mixing(const char* scheme, const Graph& g, double mix_c, double c_param,
                               double beta, int use_w_prime, char** report_json, int* all_pass) {
  return guarded([&] {
    const MixingMatrix mix = mixing_matrix_laplacian(g, mix_c);
    std::optional<double> beta_opt;
    if (beta > 0.0) beta_opt = beta;
    const NetworkScheme s = build_scheme(scheme, mix, c_param, beta_opt, use_w_prime != 0);
    const AssumptionReport rep = check_assumptions(s);
    json out = assumption_report_to_json(rep);
    out["scheme"] = s.name;
    out["n"] = s.n();
    out["comm_rounds"] = s.comm_rounds;
    out["mixing"] = mixing_validation_to_json(validate_mixing(mix, g));
    out["scheme_dump"] = scheme_to_json(s);
    if (!s.warnings.empty()) out["warnings"] = s.warnings;
    if (report_json) *report_json = dup_string(out.dump(2));
    if (all_pass) *all_pass = rep.a4() ? 1 : 0;
  });
}

}  // namespace

extern "C" {

const char* npga_version(void) { return k_version; }

const char* npga_status_name(npga_status status) {
  switch (status) {
    case NPGA_OK: return "ok";
    case NPGA_ERR_INVALID_ARG: return "invalid argument";
    case NPGA_ERR_PARSE: return "parse error";
    case NPGA_ERR_ASSUMPTION: return "assumption failure";
    case NPGA_ERR_NUMERIC: return "numeric failure";
    case NPGA_ERR_IO: return "io error";
    case NPGA_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

const char* npga_last_error(void) { return g_last_error.c_str(); }

void npga_string_free(char* s) { std::free(s); }

npga_status npga_graph_erdos_renyi(int n, double prob, uint64_t seed, int ensure_connected,
                                   npga_graph** out) {
  if (!out) return set_error(NPGA_ERR_INVALID_ARG, "out must not be null");
  return guarded([&] {
    Graph g = ensure_connected ? erdos_renyi_connected(n, prob, seed) : erdos_renyi(n, prob, seed);
    *out = new npga_graph{std::move(g)};
  });
}

npga_status npga_graph_read(const char* path, npga_graph** out) {
  if (!path || !out) return set_error(NPGA_ERR_INVALID_ARG, "path/out must not be null");
  return guarded([&] { *out = new npga_graph{read_graph_file(path)}; });
}

npga_status npga_graph_write(const npga_graph* g, const char* path) {
  if (!g || !path) return set_error(NPGA_ERR_INVALID_ARG, "graph/path must not be null");
  return guarded([&] { write_graph_file(g->g, path); });
}

int npga_graph_n(const npga_graph* g) { return g ? g->g.n : 0; }

int npga_graph_edge_count(const npga_graph* g) {
  return g ? static_cast<int>(g->g.edges.size()) : 0;
}

int npga_graph_is_connected(const npga_graph* g) {
  return g && is_connected(g->g) ? 1 : 0;
}

void npga_graph_free(npga_graph* g) { delete g; }

npga_status npga_validate_scheme(const char* scheme, int n, double prob, uint64_t seed,
                                 double mix_c, double c_param, double beta, int use_w_prime,
                                 char** report_json, int* all_pass) {
  if (!scheme) return set_error(NPGA_ERR_INVALID_ARG, "scheme must not be null");
  Graph g;
  const npga_status st = guarded([&] { g = erdos_renyi_connected(n, prob, seed); });
  if (st != NPGA_OK) return st;
  return validate_on_mixing(scheme, g, mix_c, c_param, beta, use_w_prime, report_json, all_pass);
}

npga_status npga_validate_scheme_edges(const char* scheme, const char* edge_list_text,
                                       double mix_c, double c_param, double beta, int use_w_prime,
                                       char** report_json, int* all_pass) {
  if (!scheme || !edge_list_text)
    return set_error(NPGA_ERR_INVALID_ARG, "scheme/edge list must not be null");
  Graph g;
  const npga_status st = guarded([&] { g = graph_from_edge_list(edge_list_text); });
  if (st != NPGA_OK) return st;
  return validate_on_mixing(scheme, g, mix_c, c_param, beta, use_w_prime, report_json, all_pass);
}

npga_status npga_experiment_from_json(const char* json_text, int force, long long seed_override,
                                      npga_experiment** out) {
  if (!json_text || !out) return set_error(NPGA_ERR_INVALID_ARG, "json/out must not be null");
  return guarded([&] {
    std::optional<std::uint64_t> seed;
    if (seed_override >= 0) seed = static_cast<std::uint64_t>(seed_override);
    *out = new npga_experiment{resolve_experiment_text(json_text, force != 0, seed)};
  });
}

npga_status npga_experiment_scheme_name(const npga_experiment* e, char** name) {
  if (!e || !name) return set_error(NPGA_ERR_INVALID_ARG, "experiment/name must not be null");
  *name = dup_string(e->exp.scheme.name);
  return NPGA_OK;
}

npga_status npga_experiment_instance_json(const npga_experiment* e, char** json_text) {
  if (!e || !json_text) return set_error(NPGA_ERR_INVALID_ARG, "experiment/out must not be null");
  *json_text = dup_string(e->exp.instance.dump());
  return NPGA_OK;
}

npga_status npga_experiment_output_paths(const npga_experiment* e, char** trace_path,
                                         char** summary_path, char** certificate_path) {
  if (!e) return set_error(NPGA_ERR_INVALID_ARG, "experiment must not be null");
  if (trace_path) *trace_path = dup_string(e->exp.output.trace);
  if (summary_path) *summary_path = dup_string(e->exp.output.summary);
  if (certificate_path) *certificate_path = dup_string(e->exp.output.certificate);
  return NPGA_OK;
}

npga_status npga_experiment_warnings(const npga_experiment* e, char** text) {
  if (!e || !text) return set_error(NPGA_ERR_INVALID_ARG, "experiment/out must not be null");
  std::string joined;
  for (const auto& w : e->exp.warnings) {
    joined += w;
    joined += "\n";
  }
  *text = dup_string(joined);
  return NPGA_OK;
}

int npga_experiment_has_certificate(const npga_experiment* e) {
  return e && e->exp.certificate ? 1 : 0;
}

npga_status npga_experiment_certificate_json(const npga_experiment* e, char** json_text) {
  if (!e || !json_text) return set_error(NPGA_ERR_INVALID_ARG, "experiment/out must not be null");
  if (!e->exp.certificate) return set_error(NPGA_ERR_INVALID_ARG, "experiment has no certificate");
  *json_text = dup_string(certificate_to_json(*e->exp.certificate).dump(2));
  return NPGA_OK;
}

npga_status npga_experiment_validate(const npga_experiment* e, char** report_json, int* all_pass) {
  if (!e) return set_error(NPGA_ERR_INVALID_ARG, "experiment must not be null");
  return guarded([&] {
    const AssumptionReport rep = check_assumptions(e->exp.scheme);
    json out = assumption_report_to_json(rep);
    out["scheme"] = e->exp.scheme.name;
    out["n"] = e->exp.scheme.n();
    out["comm_rounds"] = e->exp.scheme.comm_rounds;
    out["mixing"] = mixing_validation_to_json(validate_mixing(e->exp.mixing, e->exp.graph));
    out["scheme_dump"] = scheme_to_json(e->exp.scheme);
    if (report_json) *report_json = dup_string(out.dump(2));
    if (all_pass) *all_pass = rep.a4() ? 1 : 0;
  });
}

npga_status npga_experiment_run(const npga_experiment* e, npga_run_report** out) {
  if (!e || !out) return set_error(NPGA_ERR_INVALID_ARG, "experiment/out must not be null");
  return guarded([&] { *out = new npga_run_report{run_experiment(e->exp)}; });
}

void npga_experiment_free(npga_experiment* e) { delete e; }

long long npga_run_row_count(const npga_run_report* r) {
  return r ? static_cast<long long>(r->art.trace.rows.size()) : 0;
}

npga_status npga_run_row(const npga_run_report* r, long long index, npga_trace_row* out) {
  if (!r || !out) return set_error(NPGA_ERR_INVALID_ARG, "report/out must not be null");
  if (index < 0 || index >= npga_run_row_count(r))
    return set_error(NPGA_ERR_INVALID_ARG, "row index out of range");
  const TraceRow& row = r->art.trace.rows[static_cast<size_t>(index)];
  out->iter = row.iter;
  out->comm_rounds = row.comm_rounds;
  out->gap = row.gap;
  out->consensus_err = row.consensus_err;
  out->kkt = row.kkt;
  out->lyapunov = row.lyapunov;
  out->wall_ms = row.wall_ms;
  return NPGA_OK;
}

npga_status npga_run_trace_csv(const npga_run_report* r, int include_timings, char** csv_text) {
  if (!r || !csv_text) return set_error(NPGA_ERR_INVALID_ARG, "report/out must not be null");
  *csv_text = dup_string(trace_to_csv(r->art.trace, include_timings != 0));
  return NPGA_OK;
}

npga_status npga_run_summary_json(const npga_run_report* r, char** json_text) {
  if (!r || !json_text) return set_error(NPGA_ERR_INVALID_ARG, "report/out must not be null");
  *json_text = dup_string(r->art.summary.dump(2));
  return NPGA_OK;
}

double npga_run_final_gap(const npga_run_report* r) {
  return r ? r->art.trace.last().gap : std::numeric_limits<double>::quiet_NaN();
}

long long npga_run_comm_rounds(const npga_run_report* r) {
  return r ? r->art.trace.last().comm_rounds : 0;
}

int npga_run_diverged(const npga_run_report* r) { return r && r->art.trace.diverged ? 1 : 0; }

void npga_run_report_free(npga_run_report* r) { delete r; }

}  // extern "C"
