#pragma once

#include "npga/problem.hpp"
#include "npga/schemes.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace npga {

struct FixedPoint;       // oracle.hpp
struct RateCertificate;  // theory.hpp

struct StepSizes {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double theta = 0.0;
};

void validate_steps(const StepSizes& s);

enum class Engine { FourSequence, Rewritten };

Engine engine_from_string(const std::string& name);
std::string engine_to_string(Engine e);

// Iterate tuple for both engines. The four-sequence form advances
// (x, x_hat, v, y, lambda); the rewritten form never touches y and keeps
// lambda_prev instead.
struct SolverState {
  VectorXd x;
  VectorXd x_hat;
  VectorXd v;
  VectorXd y;
  VectorXd lambda;
  VectorXd lambda_prev;
  long k = 0;
};

SolverState init_state(const Problem& problem, const NetworkScheme& scheme,
                       const VectorXd& x0, const VectorXd& lambda0);
SolverState init_state(const Problem& problem, const NetworkScheme& scheme);  // zeros

SolverState step_four_sequence(const SolverState& state, const Problem& problem,
                               const NetworkScheme& scheme, const StepSizes& steps);
SolverState step_rewritten(const SolverState& state, const Problem& problem,
                           const NetworkScheme& scheme, const StepSizes& steps);

// ||lambda - 1 (x) lambda_bar|| with lambda_bar the block average.
double consensus_error(const VectorXd& lambda, int n, int p);

struct TraceRow {
  long iter = 0;
  long comm_rounds = 0;
  double gap = std::numeric_limits<double>::quiet_NaN();
  double consensus_err = 0.0;
  double kkt = 0.0;
  double lyapunov = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
};

struct Trace {
  std::vector<TraceRow> rows;
  bool diverged = false;
  std::string stop_reason;

  const TraceRow& last() const { return rows.back(); }
};

struct RunOptions {
  Engine engine = Engine::FourSequence;
  long max_iters = 1000;
  double stop_gap = 0.0;  // <= 0 disables the gap stop
  std::optional<VectorXd> x_star;
  const FixedPoint* fixed_point = nullptr;            // enables the lyapunov column
  const RateCertificate* certificate = nullptr;       // required with fixed_point
  double divergence_factor = 1e6;
};

Trace run(const Problem& problem, const NetworkScheme& scheme, const StepSizes& steps,
          const RunOptions& options);

}  // namespace npga
