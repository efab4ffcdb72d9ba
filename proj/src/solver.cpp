#include "npga/solver.hpp"

#include "npga/oracle.hpp"
#include "npga/theory.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace npga {

void validate_steps(const StepSizes& s) {
  if (!(s.alpha > 0.0) || !std::isfinite(s.alpha)) throw std::invalid_argument("alpha must be finite and > 0");
  if (!(s.beta > 0.0) || !std::isfinite(s.beta)) throw std::invalid_argument("beta must be finite and > 0");
  if (!(s.gamma > 0.0) || !std::isfinite(s.gamma)) throw std::invalid_argument("gamma must be finite and > 0");
  if (s.theta < 0.0 || !std::isfinite(s.theta)) throw std::invalid_argument("theta must be finite and >= 0");
}

Engine engine_from_string(const std::string& name) {
  if (name == "four_seq" || name == "four_sequence" || name == "four-sequence")
    return Engine::FourSequence;
  if (name == "rewritten") return Engine::Rewritten;
  throw std::invalid_argument("unknown engine: " + name);
}

std::string engine_to_string(Engine e) {
  return e == Engine::FourSequence ? "four_seq" : "rewritten";
}

namespace {

struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check_state_finite(const SolverState& s) {
  if (!all_finite(s.x) || !all_finite(s.v) || !all_finite(s.lambda) || !all_finite(s.y))
    throw numeric_error("non-finite values in solver state at iteration " + std::to_string(s.k));
}

void check_dims(const SolverState& s, const Problem& problem, const NetworkScheme& scheme) {
  const Eigen::Index np = static_cast<Eigen::Index>(problem.n_agents()) * problem.p;
  if (scheme.n() != problem.n_agents())
    throw std::invalid_argument("scheme size does not match the agent count");
  if (s.x.size() != problem.d_total || s.lambda.size() != np || s.v.size() != np ||
      s.y.size() != np)
    throw std::invalid_argument("solver state dimensions do not match the problem");
}

}  // namespace

SolverState init_state(const Problem& problem, const NetworkScheme& scheme, const VectorXd& x0,
                       const VectorXd& lambda0) {
  const Eigen::Index np = static_cast<Eigen::Index>(problem.n_agents()) * problem.p;
  if (x0.size() != problem.d_total) throw std::invalid_argument("init_state: x0 has wrong length");
  if (lambda0.size() != np) throw std::invalid_argument("init_state: lambda0 has wrong length");
  SolverState s;
  s.x = x0;
  s.x_hat = x0;
  s.v = lambda0;
  s.y = VectorXd::Zero(np);
  s.lambda = lambda0;
  s.lambda_prev = lambda0;
  s.k = 0;
  check_dims(s, problem, scheme);
  return s;
}

SolverState init_state(const Problem& problem, const NetworkScheme& scheme) {
  const Eigen::Index np = static_cast<Eigen::Index>(problem.n_agents()) * problem.p;
  return init_state(problem, scheme, VectorXd::Zero(problem.d_total), VectorXd::Zero(np));
}

SolverState step_four_sequence(const SolverState& state, const Problem& problem,
                               const NetworkScheme& scheme, const StepSizes& steps) {
  check_dims(state, problem, scheme);
  const int p = problem.p;

  SolverState next;
  next.x = problem.prox_g(
      steps.alpha,
      state.x - steps.alpha * (problem.grad_f(state.x) + problem.apply_at_block(state.lambda)));
  next.x_hat = next.x + steps.theta * (next.x - state.x);
  next.v = state.lambda - apply_lifted(scheme.c, state.lambda, p) -
           apply_lifted(scheme.b, state.y, p) + steps.beta * problem.apply_a_block(next.x_hat);
  next.y = state.y + steps.gamma * apply_lifted(scheme.b, next.v, p);
  next.lambda = problem.conj_prox_blockwise(steps.beta / problem.n_agents(),
                                            apply_lifted(scheme.d, next.v, p));
  next.lambda_prev = state.lambda;
  next.k = state.k + 1;
  check_state_finite(next);
  return next;
}

SolverState step_rewritten(const SolverState& state, const Problem& problem,
                           const NetworkScheme& scheme, const StepSizes& steps) {
  check_dims(state, problem, scheme);
  const int p = problem.p;

  SolverState next;
  next.x = problem.prox_g(
      steps.alpha,
      state.x - steps.alpha * (problem.grad_f(state.x) + problem.apply_at_block(state.lambda)));
  next.x_hat = next.x + steps.theta * (next.x - state.x);
  const VectorXd dl = state.lambda - state.lambda_prev;
  next.v = dl - apply_lifted(scheme.c, dl, p) + state.v -
           steps.gamma * apply_lifted(scheme.b2, state.v, p) +
           steps.beta * problem.apply_a_block(next.x_hat - state.x_hat);
  next.lambda = problem.conj_prox_blockwise(steps.beta / problem.n_agents(),
                                            apply_lifted(scheme.d, next.v, p));
  next.lambda_prev = state.lambda;
  next.y = state.y;  // unused by this engine
  next.k = state.k + 1;
  check_state_finite(next);
  return next;
}

double consensus_error(const VectorXd& lambda, int n, int p) {
  if (lambda.size() != static_cast<Eigen::Index>(n) * p)
    throw std::invalid_argument("consensus_error: dimension mismatch");
  Eigen::Map<const MatrixXd> blocks(lambda.data(), p, n);
  const VectorXd mean = blocks.rowwise().mean();
  return (blocks.colwise() - mean).norm();
}

Trace run(const Problem& problem, const NetworkScheme& scheme, const StepSizes& steps,
          const RunOptions& options) {
  validate_steps(steps);
  if (options.fixed_point && !options.certificate)
    throw std::invalid_argument("run: a fixed point without a certificate cannot price the lyapunov");

  SolverState state = init_state(problem, scheme);
  const int n = problem.n_agents();
  const int p = problem.p;

  double gap_denom = 1.0;
  if (options.x_star) {
    if (options.x_star->size() != problem.d_total)
      throw std::invalid_argument("run: x_star has wrong length");
    gap_denom = (state.x - *options.x_star).norm();
    if (gap_denom < 1e-300) gap_denom = 1.0;  // started at the solution
  }

  Trace trace;
  double wall_ms = 0.0;
  auto record = [&](const SolverState& s) {
    TraceRow row;
    row.iter = s.k;
    row.comm_rounds = s.k * scheme.comm_rounds;
    if (options.x_star) row.gap = (s.x - *options.x_star).norm() / gap_denom;
    row.consensus_err = consensus_error(s.lambda, n, p);
    Eigen::Map<const MatrixXd> blocks(s.lambda.data(), p, n);
    row.kkt = kkt_residual(problem, s.x, blocks.rowwise().mean());
    if (options.fixed_point && options.certificate)
      row.lyapunov = lyapunov_value(*options.certificate, s, *options.fixed_point, problem, scheme);
    row.wall_ms = wall_ms;
    trace.rows.push_back(row);
  };
  record(state);

  const double initial_gap = options.x_star ? trace.rows.front().gap : 1.0;
  for (long k = 0; k < options.max_iters; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      state = options.engine == Engine::FourSequence
                  ? step_four_sequence(state, problem, scheme, steps)
                  : step_rewritten(state, problem, scheme, steps);
    } catch (const numeric_error& err) {
      trace.diverged = true;
      trace.stop_reason = err.what();
      break;
    }
    wall_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    record(state);

    const TraceRow& row = trace.rows.back();
    if (options.x_star) {
      if (row.gap > options.divergence_factor * initial_gap) {
        trace.diverged = true;
        trace.stop_reason = "divergence detected: gap exceeded " +
                            std::to_string(options.divergence_factor) + " x initial";
        break;
      }
      if (options.stop_gap > 0.0 && row.gap <= options.stop_gap) {
        trace.stop_reason = "gap threshold reached";
        break;
      }
    } else if (state.x.norm() > 1e150) {
      trace.diverged = true;
      trace.stop_reason = "divergence detected: iterate norm blow-up";
      break;
    }
  }
  if (trace.stop_reason.empty()) trace.stop_reason = "max iterations";
  return trace;
}

}  // namespace npga
