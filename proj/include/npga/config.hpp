#pragma once

#include "npga/graph.hpp"
#include "npga/io.hpp"
#include "npga/oracle.hpp"
#include "npga/problem.hpp"
#include "npga/schemes.hpp"
#include "npga/solver.hpp"
#include "npga/theory.hpp"

#include <optional>
#include <string>
#include <vector>

namespace npga {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OutputSpec {
  std::string trace = "trace.csv";
  std::string summary = "summary.json";
  std::string certificate = "certificate.json";
};

// A config resolved into runnable pieces. `instance` is the canonical
// problem+graph block used by `compare` to enforce matching instances.
struct Experiment {
  Problem problem;
  Graph graph;
  MixingMatrix mixing;
  NetworkScheme scheme;
  StepSizes steps;
  std::optional<RateCase> certified_case;
  std::optional<RateCertificate> certificate;
  Engine engine = Engine::FourSequence;
  long max_iters = 1000;
  double stop_gap = 0.0;
  OutputSpec output;
  bool force = false;
  std::vector<std::string> warnings;
  json instance;
};

// Parses and resolves a JSON config. Unknown fields are rejected. Throws
// config_error for schema/shape problems and assumption_error when the
// scheme fails Assumption 4 (or the requested case) without `force`.
Experiment resolve_experiment(const json& config, bool force = false,
                              std::optional<std::uint64_t> seed_override = std::nullopt);
Experiment resolve_experiment_text(const std::string& config_text, bool force = false,
                                   std::optional<std::uint64_t> seed_override = std::nullopt);

struct RunArtifacts {
  Trace trace;
  OracleSolution oracle;
  json summary;
};

// Oracle solve, optional fixed point + lyapunov wiring, then the solver run
// and the summary document.
RunArtifacts run_experiment(const Experiment& experiment);

}  // namespace npga
