// Batch experiment runner over the npga C API: resolves JSON configs into
// runs, emits trace CSV / summary JSON / certificate JSON artifacts, prints
// assumption tables and step-size boxes, and merges runs for comparison.

#include <npga.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAssumption = 3;

struct CStr {
  char* ptr = nullptr;
  ~CStr() { npga_string_free(ptr); }
  std::string str() const { return ptr ? std::string(ptr) : std::string(); }
};

int exit_code_for(npga_status status) {
  switch (status) {
    case NPGA_OK: return kExitOk;
    case NPGA_ERR_PARSE:
    case NPGA_ERR_INVALID_ARG: return kExitConfig;
    case NPGA_ERR_ASSUMPTION: return kExitAssumption;
    default: return kExitRuntime;
  }
}

int report_failure(const std::string& where, npga_status status) {
  std::cerr << "npga: " << where << ": " << npga_status_name(status) << ": " << npga_last_error()
            << "\n";
  return exit_code_for(status);
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out << content;
  return static_cast<bool>(out);
}

struct ExperimentHandle {
  npga_experiment* ptr = nullptr;
  ~ExperimentHandle() { npga_experiment_free(ptr); }
};

struct ReportHandle {
  npga_run_report* ptr = nullptr;
  ~ReportHandle() { npga_run_report_free(ptr); }
};

int load_experiment(const std::string& config_path, bool force, long long seed,
                    ExperimentHandle& out) {
  const auto text = read_file(config_path);
  if (!text) {
    std::cerr << "npga: cannot read config file: " << config_path << "\n";
    return kExitConfig;
  }
  const npga_status status = npga_experiment_from_json(text->c_str(), force ? 1 : 0, seed, &out.ptr);
  if (status != NPGA_OK) return report_failure(config_path, status);
  CStr warnings;
  npga_experiment_warnings(out.ptr, &warnings.ptr);
  if (warnings.ptr && warnings.ptr[0] != '\0') std::cerr << warnings.str();
  return kExitOk;
}

void print_check_line(const std::string& label, const json& check) {
  const std::string note =
      check.contains("note") ? "   (" + check.at("note").get<std::string>() + ")" : "";
  std::printf("  %-8s %s   witness %.3e%s\n", label.c_str(),
              check.at("pass").get<bool>() ? "pass" : "FAIL", check.at("witness").get<double>(),
              note.c_str());
}

int print_validation_report(const std::string& report_json, const std::string& require,
                            const std::string& dump_path) {
  const json rep = json::parse(report_json);
  if (!dump_path.empty() && !write_file(dump_path, rep.at("scheme_dump").dump(2) + "\n")) {
    std::cerr << "npga: cannot write scheme dump to " << dump_path << "\n";
    return kExitRuntime;
  }
  std::printf("scheme %s on %d agents (%d communication rounds per iteration)\n",
              rep.at("scheme").get<std::string>().c_str(), rep.at("n").get<int>(),
              rep.at("comm_rounds").get<int>());
  for (const char* key : {"a4_i", "a4_ii", "a4_iii", "a4_iv", "a6", "a7", "a9"})
    print_check_line(key, rep.at(key));
  if (rep.contains("warnings"))
    for (const auto& w : rep.at("warnings")) std::cerr << "warning: " << w.get<std::string>() << "\n";

  bool ok = rep.at("a4").get<bool>();
  std::stringstream extra(require);
  std::string token;
  while (std::getline(extra, token, ',')) {
    if (token.empty()) continue;
    if (!rep.contains(token)) {
      std::cerr << "npga: unknown assumption '" << token << "' in --require\n";
      return kExitConfig;
    }
    ok = ok && rep.at(token).at("pass").get<bool>();
  }
  return ok ? kExitOk : kExitAssumption;
}

int cmd_run(const std::string& config_path, bool force, long long seed, const std::string& out_dir,
            bool timings) {
  ExperimentHandle exp;
  if (int rc = load_experiment(config_path, force, seed, exp); rc != kExitOk) return rc;

  ReportHandle report;
  const npga_status status = npga_experiment_run(exp.ptr, &report.ptr);
  if (status != NPGA_OK) return report_failure("run", status);

  CStr trace_rel, summary_rel, cert_rel;
  npga_experiment_output_paths(exp.ptr, &trace_rel.ptr, &summary_rel.ptr, &cert_rel.ptr);
  CStr trace_csv, summary;
  npga_run_trace_csv(report.ptr, timings ? 1 : 0, &trace_csv.ptr);
  npga_run_summary_json(report.ptr, &summary.ptr);

  const fs::path base(out_dir);
  if (!write_file(base / trace_rel.str(), trace_csv.str()) ||
      !write_file(base / summary_rel.str(), summary.str() + "\n")) {
    std::cerr << "npga: cannot write outputs under " << out_dir << "\n";
    return kExitRuntime;
  }
  if (npga_experiment_has_certificate(exp.ptr)) {
    CStr cert;
    npga_experiment_certificate_json(exp.ptr, &cert.ptr);
    if (!write_file(base / cert_rel.str(), cert.str() + "\n")) {
      std::cerr << "npga: cannot write certificate under " << out_dir << "\n";
      return kExitRuntime;
    }
  }

  std::printf("final gap %.6e after %lld iterations (%lld communication rounds)\n",
              npga_run_final_gap(report.ptr),
              npga_run_row_count(report.ptr) > 0 ? npga_run_row_count(report.ptr) - 1 : 0,
              npga_run_comm_rounds(report.ptr));
  if (npga_run_diverged(report.ptr)) {
    std::cerr << "npga: run diverged, see " << (base / summary_rel.str()) << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_validate_config(const std::string& config_path, long long seed,
                        const std::string& require, const std::string& dump_path) {
  // always force here: validation inspects the scheme, the report and exit
  // code carry the verdict
  ExperimentHandle exp;
  if (int rc = load_experiment(config_path, true, seed, exp); rc != kExitOk) return rc;
  CStr report;
  int all_pass = 0;
  const npga_status status = npga_experiment_validate(exp.ptr, &report.ptr, &all_pass);
  if (status != NPGA_OK) return report_failure("validate", status);
  return print_validation_report(report.str(), require, dump_path);
}

int cmd_validate_flags(const std::string& scheme, int n, double prob, long long seed, double mix_c,
                       double c_param, double beta, bool w_prime, const std::string& graph_file,
                       const std::string& require, const std::string& dump_path) {
  CStr report;
  int all_pass = 0;
  npga_status status;
  if (!graph_file.empty()) {
    const auto text = read_file(graph_file);
    if (!text) {
      std::cerr << "npga: cannot read graph file: " << graph_file << "\n";
      return kExitConfig;
    }
    status = npga_validate_scheme_edges(scheme.c_str(), text->c_str(), mix_c, c_param, beta,
                                        w_prime ? 1 : 0, &report.ptr, &all_pass);
  } else {
    status = npga_validate_scheme(scheme.c_str(), n, prob, static_cast<uint64_t>(seed), mix_c,
                                  c_param, beta, w_prime ? 1 : 0, &report.ptr, &all_pass);
  }
  if (status != NPGA_OK) return report_failure("validate", status);
  return print_validation_report(report.str(), require, dump_path);
}

int cmd_bounds(const std::string& config_path, bool force, long long seed) {
  ExperimentHandle exp;
  if (int rc = load_experiment(config_path, force, seed, exp); rc != kExitOk) return rc;
  if (!npga_experiment_has_certificate(exp.ptr)) {
    std::cerr << "npga: config produced no certificate; use steps.auto or steps.case so a "
                 "theorem applies\n";
    return kExitConfig;
  }
  CStr cert_text;
  npga_experiment_certificate_json(exp.ptr, &cert_text.ptr);
  const json cert = json::parse(cert_text.str());
  auto bound = [&](const char* key) {
    const json& b = cert.at(key);
    std::printf("  %-9s %s %.12g\n", key, b.at("open").get<bool>() ? "<" : "<=",
                b.at("value").get<double>());
  };
  std::printf("case %s\n", cert.at("case").get<std::string>().c_str());
  bound("alpha_max");
  bound("beta_max");
  bound("gamma_max");
  const json& steps = cert.at("steps");
  std::printf("steps: alpha %.12g beta %.12g gamma %.12g theta %.12g\n",
              steps.at("alpha").get<double>(), steps.at("beta").get<double>(),
              steps.at("gamma").get<double>(), steps.at("theta").get<double>());
  std::printf("delta %.12g (delta1 %.12g delta2 %.12g delta3 %.12g)\n",
              cert.at("delta").get<double>(), cert.at("delta1").get<double>(),
              cert.at("delta2").get<double>(), cert.at("delta3").get<double>());
  return kExitOk;
}

int cmd_compare(const std::vector<std::string>& config_paths, bool force, long long seed,
                const std::string& out_dir, bool timings) {
  struct Entry {
    std::string label;
    std::shared_ptr<ExperimentHandle> exp;
    std::shared_ptr<ReportHandle> report;
  };
  std::vector<Entry> entries;
  std::string instance;
  for (size_t i = 0; i < config_paths.size(); ++i) {
    Entry e;
    e.exp = std::make_shared<ExperimentHandle>();
    if (int rc = load_experiment(config_paths[i], force, seed, *e.exp); rc != kExitOk) return rc;
    CStr inst;
    npga_experiment_instance_json(e.exp->ptr, &inst.ptr);
    if (i == 0) {
      instance = inst.str();
    } else if (inst.str() != instance) {
      std::cerr << "npga: config " << config_paths[i]
                << " describes a different problem/graph than " << config_paths[0] << "\n";
      return kExitConfig;
    }
    CStr name;
    npga_experiment_scheme_name(e.exp->ptr, &name.ptr);
    e.label = fs::path(config_paths[i]).stem().string() + ":" + name.str();
    entries.push_back(std::move(e));
  }

  const fs::path base(out_dir);
  long long max_rows = 0;
  for (auto& e : entries) {
    e.report = std::make_shared<ReportHandle>();
    const npga_status status = npga_experiment_run(e.exp->ptr, &e.report->ptr);
    if (status != NPGA_OK) return report_failure("run " + e.label, status);
    max_rows = std::max(max_rows, npga_run_row_count(e.report->ptr));

    CStr trace_csv, summary;
    npga_run_trace_csv(e.report->ptr, timings ? 1 : 0, &trace_csv.ptr);
    npga_run_summary_json(e.report->ptr, &summary.ptr);
    const std::string stem = e.label.substr(0, e.label.find(':'));
    if (!write_file(base / (stem + "_trace.csv"), trace_csv.str()) ||
        !write_file(base / (stem + "_summary.json"), summary.str() + "\n")) {
      std::cerr << "npga: cannot write outputs under " << out_dir << "\n";
      return kExitRuntime;
    }
    std::printf("%-40s final gap %.6e after %lld iterations / %lld rounds\n", e.label.c_str(),
                npga_run_final_gap(e.report->ptr), npga_run_row_count(e.report->ptr) - 1,
                npga_run_comm_rounds(e.report->ptr));
  }

  // merged table keyed by iteration; per run, the communication-round count
  // and gap columns allow either axis when plotting
  std::ostringstream merged;
  merged << "iter";
  for (const auto& e : entries) merged << ",comm_rounds[" << e.label << "],gap[" << e.label << "]";
  merged << "\n";
  for (long long row = 0; row < max_rows; ++row) {
    merged << row;
    for (const auto& e : entries) {
      npga_trace_row data;
      if (row < npga_run_row_count(e.report->ptr) &&
          npga_run_row(e.report->ptr, row, &data) == NPGA_OK) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), ",%lld,%.17g", data.comm_rounds, data.gap);
        merged << buf;
      } else {
        merged << ",,";
      }
    }
    merged << "\n";
  }
  if (!write_file(base / "compare.csv", merged.str())) {
    std::cerr << "npga: cannot write " << (base / "compare.csv") << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"npga: decentralized constraint-coupled optimization simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(npga_version()));

  std::string config_path, out_dir = ".", require, graph_file, dump_scheme;
  std::vector<std::string> config_paths;
  bool force = false, timings = false, w_prime = false;
  long long seed = -1;
  std::string scheme;
  int n = 0;
  double prob = 0.3, mix_c = 1.0, c_param = 1.0, beta = 0.0;

  auto* run = app.add_subcommand("run", "resolve a config, solve, and write trace/summary");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_flag("--force", force, "run despite failed assumptions (certificate omitted)");
  run->add_option("--out", out_dir, "output directory (default .)");
  run->add_option("--seed", seed, "override the config seeds");
  run->add_flag("--timings", timings, "record wall time in the trace (breaks byte-identical output)");

  auto* validate = app.add_subcommand("validate", "print the assumption report for a scheme");
  validate->add_option("--config", config_path, "take scheme+graph from this config");
  validate->add_option("--scheme", scheme, "scheme name (flag form)");
  validate->add_option("--n", n, "agent count for the Erdos-Renyi graph");
  validate->add_option("--prob", prob, "edge probability (default 0.3)");
  validate->add_option("--seed", seed, "graph seed");
  validate->add_option("--c-mix", mix_c, "Laplacian-method constant c (default 1)");
  validate->add_option("--c-param", c_param, "scheme constant c (P2D2/NIDS/DLM)");
  validate->add_option("--beta", beta, "beta for NPGA-DLM");
  validate->add_flag("--w-prime", w_prime, "substitute W' = (I + W)/2");
  validate->add_option("--graph-file", graph_file, "edge-list file instead of Erdos-Renyi");
  validate->add_option("--require", require,
                       "comma list of extra gates for the exit code (a6,a7,a9)");
  validate->add_option("--dump-scheme", dump_scheme,
                       "write the scheme matrices (B2, C, D) as JSON to this file");

  auto* bounds = app.add_subcommand("bounds", "print the admissible step-size box and delta");
  bounds->add_option("--config", config_path, "experiment config (JSON)")->required();
  bounds->add_flag("--force", force, "compute past failed assumptions where possible");
  bounds->add_option("--seed", seed, "override the config seeds");

  auto* compare = app.add_subcommand("compare", "run several configs on one instance");
  compare->add_option("--config", config_paths, "config per run (repeat)")->required();
  compare->add_flag("--force", force, "run despite failed assumptions");
  compare->add_option("--out", out_dir, "output directory (default .)");
  compare->add_option("--seed", seed, "override the config seeds");
  compare->add_flag("--timings", timings, "record wall time in traces");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(config_path, force, seed, out_dir, timings);
  if (validate->parsed()) {
    if (!config_path.empty()) return cmd_validate_config(config_path, seed, require, dump_scheme);
    if (scheme.empty() || (n < 2 && graph_file.empty())) {
      std::cerr << "npga: validate needs --config, or --scheme with --n/--graph-file\n";
      return kExitConfig;
    }
    return cmd_validate_flags(scheme, n, prob, seed < 0 ? 0 : seed, mix_c, c_param, beta, w_prime,
                              graph_file, require, dump_scheme);
  }
  if (bounds->parsed()) return cmd_bounds(config_path, force, seed);
  if (compare->parsed()) return cmd_compare(config_paths, force, seed, out_dir, timings);
  return kExitConfig;
}
