/*
 * C API for the npga library: decentralized constraint-coupled optimization
 * with nested primal-dual gradient iterations, network-matrix schemes,
 * step-size/rate certificates, and deterministic experiment runs.
 *
 * All handles are opaque. Functions return NPGA_OK on success and an error
 * code otherwise; npga_last_error() carries a thread-local detail message
 * for the most recent failing call on this thread. Strings returned through
 * char** are heap-allocated and must be released with npga_string_free().
 */
#ifndef NPGA_H
#define NPGA_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum npga_status {
  NPGA_OK = 0,
  NPGA_ERR_INVALID_ARG = 1,
  NPGA_ERR_PARSE = 2,      /* config/schema problems */
  NPGA_ERR_ASSUMPTION = 3, /* scheme or case assumptions failed */
  NPGA_ERR_NUMERIC = 4,
  NPGA_ERR_IO = 5,
  NPGA_ERR_INTERNAL = 6
} npga_status;

const char* npga_version(void);
const char* npga_status_name(npga_status status);
const char* npga_last_error(void);
void npga_string_free(char* s);

/* ---- graphs (edge-list text format: "n m" then m lines "i j") ---- */

typedef struct npga_graph npga_graph;

npga_status npga_graph_erdos_renyi(int n, double prob, uint64_t seed, int ensure_connected,
                                   npga_graph** out);
npga_status npga_graph_read(const char* path, npga_graph** out);
npga_status npga_graph_write(const npga_graph* g, const char* path);
int npga_graph_n(const npga_graph* g);
int npga_graph_edge_count(const npga_graph* g);
int npga_graph_is_connected(const npga_graph* g);
void npga_graph_free(npga_graph* g);

/* ---- scheme validation ----
 * Builds the named scheme on an Erdos-Renyi graph (or an explicit edge
 * list) and reports the assumption checks as a JSON document. `beta` is
 * only consulted for NPGA-DLM; pass 0 otherwise. `all_pass` receives
 * whether Assumption 4 holds. */

npga_status npga_validate_scheme(const char* scheme, int n, double prob, uint64_t seed,
                                 double mix_c, double c_param, double beta, int use_w_prime,
                                 char** report_json, int* all_pass);
npga_status npga_validate_scheme_edges(const char* scheme, const char* edge_list_text,
                                       double mix_c, double c_param, double beta, int use_w_prime,
                                       char** report_json, int* all_pass);

/* ---- experiments ---- */

typedef struct npga_experiment npga_experiment;
typedef struct npga_run_report npga_run_report;

typedef struct npga_trace_row {
  long long iter;
  long long comm_rounds;
  double gap;
  double consensus_err;
  double kkt;
  double lyapunov; /* NaN when no certificate/fixed point was available */
  double wall_ms;
} npga_trace_row;

/* seed_override < 0 keeps the seeds from the config. */
npga_status npga_experiment_from_json(const char* json_text, int force, long long seed_override,
                                      npga_experiment** out);
npga_status npga_experiment_scheme_name(const npga_experiment* e, char** name);
/* Canonical problem+graph block, used to check that compared configs share
 * one instance. */
npga_status npga_experiment_instance_json(const npga_experiment* e, char** json_text);
npga_status npga_experiment_output_paths(const npga_experiment* e, char** trace_path,
                                         char** summary_path, char** certificate_path);
npga_status npga_experiment_warnings(const npga_experiment* e, char** text);
int npga_experiment_has_certificate(const npga_experiment* e);
npga_status npga_experiment_certificate_json(const npga_experiment* e, char** json_text);
npga_status npga_experiment_validate(const npga_experiment* e, char** report_json, int* all_pass);
npga_status npga_experiment_run(const npga_experiment* e, npga_run_report** out);
void npga_experiment_free(npga_experiment* e);

long long npga_run_row_count(const npga_run_report* r);
npga_status npga_run_row(const npga_run_report* r, long long index, npga_trace_row* out);
npga_status npga_run_trace_csv(const npga_run_report* r, int include_timings, char** csv_text);
npga_status npga_run_summary_json(const npga_run_report* r, char** json_text);
double npga_run_final_gap(const npga_run_report* r);
long long npga_run_comm_rounds(const npga_run_report* r);
int npga_run_diverged(const npga_run_report* r);
void npga_run_report_free(npga_run_report* r);

#ifdef __cplusplus
}
#endif

#endif /* NPGA_H */
