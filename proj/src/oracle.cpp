#include "npga/oracle.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace npga {

StepSizes oracle_reference_steps(const Problem& problem) {
  if (!(problem.l > 0.0)) throw std::invalid_argument("problem has no smoothness modulus");
  StepSizes s;
  s.alpha = 1.0 / (2.0 * problem.l);
  const double sigma2 = problem.sigma_max_a_full * problem.sigma_max_a_full;
  if (sigma2 <= 0.0) {
    s.beta = 1.0;
  } else if (problem.mu > 0.0) {
    s.beta = problem.mu / (2.0 * sigma2);
  } else {
    // mu = 0: stay inside the classical primal-dual stability region
    // alpha * beta * sigma_max^2(A) < 1.
    s.beta = 0.9 / (s.alpha * sigma2);
  }
  s.theta = 1.0;
  s.gamma = 1.0;  // unused by the centralized iteration
  return s;
}

double kkt_residual(const Problem& problem, const VectorXd& x, const VectorXd& lambda_bar) {
  if (x.size() != problem.d_total || lambda_bar.size() != problem.p)
    throw std::invalid_argument("kkt_residual: dimension mismatch");
  const StepSizes ref = oracle_reference_steps(problem);
  const VectorXd grad = problem.grad_f(x) + problem.a_full.transpose() * lambda_bar;
  const double r_primal = (x - problem.prox_g(ref.alpha, x - ref.alpha * grad)).norm();
  const double r_dual =
      (lambda_bar - conj_prox(problem.h, ref.beta, lambda_bar + ref.beta * (problem.a_full * x)))
          .norm();
  return r_primal + r_dual;
}

OracleSolution centralized_pga(const Problem& problem, double alpha, double beta, double theta,
                               long max_iters, double tol, std::optional<VectorXd> x0,
                               std::optional<VectorXd> lambda0) {
  if (!(alpha > 0.0) || !(beta > 0.0) || theta < 0.0)
    throw std::invalid_argument("centralized_pga: invalid step sizes");
  VectorXd x = x0 ? *x0 : VectorXd::Zero(problem.d_total);
  VectorXd lambda = lambda0 ? *lambda0 : VectorXd::Zero(problem.p);
  if (x.size() != problem.d_total || lambda.size() != problem.p)
    throw std::invalid_argument("centralized_pga: warm start has wrong dimensions");

  OracleSolution sol;
  for (long k = 0; k < max_iters; ++k) {
    const VectorXd x_next = problem.prox_g(
        alpha, x - alpha * (problem.grad_f(x) + problem.a_full.transpose() * lambda));
    const VectorXd x_extrapolated = x_next + theta * (x_next - x);
    lambda = conj_prox(problem.h, beta, lambda + beta * (problem.a_full * x_extrapolated));
    x = x_next;
    sol.iterations = k + 1;
    sol.kkt = kkt_residual(problem, x, lambda);
    if (!std::isfinite(sol.kkt)) throw std::runtime_error("centralized_pga: diverged");
    if (sol.kkt < tol) {
      sol.converged = true;
      break;
    }
  }
  sol.x_star = x;
  sol.lambda_star = lambda;
  return sol;
}

OracleSolution solve_reference(const Problem& problem, double tol, long max_iters) {
  const StepSizes ref = oracle_reference_steps(problem);
  OracleSolution sol = centralized_pga(problem, ref.alpha, ref.beta, ref.theta, max_iters, tol);
  if (!sol.converged && sol.kkt <= 1e-10) sol.converged = true;  // relaxed fallback
  return sol;
}

VectorXd FixedPoint::lambda_stacked(int n) const {
  VectorXd out(static_cast<Eigen::Index>(n) * lambda_star.size());
  for (int i = 0; i < n; ++i) out.segment(i * lambda_star.size(), lambda_star.size()) = lambda_star;
  return out;
}

VectorXd FixedPoint::v_stacked(int n) const {
  VectorXd out(static_cast<Eigen::Index>(n) * v_star.size());
  for (int i = 0; i < n; ++i) out.segment(i * v_star.size(), v_star.size()) = v_star;
  return out;
}

SolverState FixedPoint::as_state(const Problem& problem) const {
  const int n = problem.n_agents();
  SolverState s;
  s.x = x_star;
  s.x_hat = x_star;
  s.v = v_stacked(n);
  s.y = y_star_c;
  s.lambda = lambda_stacked(n);
  s.lambda_prev = s.lambda;
  s.k = 0;
  return s;
}

FixedPoint construct_fixed_point(const Problem& problem, const NetworkScheme& scheme, double beta,
                                 const VectorXd& x_star, const VectorXd& lambda_star) {
  if (!(beta > 0.0)) throw std::invalid_argument("construct_fixed_point: beta must be > 0");
  if (x_star.size() != problem.d_total || lambda_star.size() != problem.p)
    throw std::invalid_argument("construct_fixed_point: dimension mismatch");
  const int n = problem.n_agents();
  const int p = problem.p;
  if (scheme.n() != n) throw std::invalid_argument("construct_fixed_point: scheme size mismatch");

  FixedPoint fp;
  fp.beta = beta;
  fp.x_star = x_star;
  fp.lambda_star = lambda_star;
  fp.v_star = lambda_star + (beta / n) * (problem.a_full * x_star);

  const VectorXd lambda_st = fp.lambda_stacked(n);
  const VectorXd v_st = fp.v_stacked(n);
  const VectorXd rhs = lambda_st - apply_lifted(scheme.c, lambda_st, p) +
                       beta * problem.apply_a_block(x_star) - v_st;

  // Solve B y = rhs blockwise in the eigenbasis of B^2; the components on
  // the null space measure how far rhs falls outside col(B).
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(scheme.b2);
  if (es.info() != Eigen::Success) throw std::runtime_error("construct_fixed_point: eigensolve failed");
  const VectorXd b2_eigs = es.eigenvalues();
  const MatrixXd q = es.eigenvectors();
  const double thr = 1e-12 * std::max(b2_eigs(n - 1), 1e-300);

  Eigen::Map<const MatrixXd> rhs_blocks(rhs.data(), p, n);
  const MatrixXd rhs_hat = rhs_blocks * q;
  MatrixXd y_hat = MatrixXd::Zero(p, n);
  double off_col_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    if (b2_eigs(i) > thr)
      y_hat.col(i) = rhs_hat.col(i) / std::sqrt(b2_eigs(i));
    else
      off_col_sq += rhs_hat.col(i).squaredNorm();
  }
  fp.y_star_c.resize(static_cast<Eigen::Index>(n) * p);
  Eigen::Map<MatrixXd>(fp.y_star_c.data(), p, n) = y_hat * q.transpose();
  fp.residuals.col_b_rel = std::sqrt(off_col_sq) / std::max(rhs.norm(), 1e-300);

  const StepSizes ref = oracle_reference_steps(problem);
  fp.residuals.opt_x =
      (x_star -
       problem.prox_g(ref.alpha, x_star - ref.alpha * (problem.grad_f(x_star) +
                                                       problem.apply_at_block(lambda_st))))
          .norm();
  fp.residuals.eq_v = (v_st - (rhs - apply_lifted(scheme.b, fp.y_star_c, p) + v_st)).norm();
  fp.residuals.eq_bv = apply_lifted(scheme.b, v_st, p).norm();
  fp.residuals.eq_prox =
      (lambda_st - problem.conj_prox_blockwise(beta / n, apply_lifted(scheme.d, v_st, p))).norm();
  return fp;
}

std::string fixed_point_cache_key(const Problem& problem, double beta,
                                  const std::string& scheme_name) {
  std::ostringstream key;
  key << std::hex << problem.structure_hash() << "-" << std::hexfloat << beta << "-" << scheme_name;
  return key.str();
}

namespace {

// Per-agent transcription helpers: block i of a stacked np vector.
inline VectorXd::ConstSegmentReturnType block_of(const VectorXd& v, int i, int p) {
  return v.segment(static_cast<Eigen::Index>(i) * p, p);
}

}  // namespace

SolverState dcpa_step(const SolverState& state, const Problem& problem, const MatrixXd& w,
                      const StepSizes& steps) {
  const int n = problem.n_agents();
  const int p = problem.p;
  if (w.rows() != n || w.cols() != n) throw std::invalid_argument("dcpa_step: W size mismatch");

  SolverState next;
  next.x = problem.prox_g(
      steps.alpha,
      state.x - steps.alpha * (problem.grad_f(state.x) + problem.apply_at_block(state.lambda)));
  next.x_hat = next.x + steps.theta * (next.x - state.x);
  const VectorXd ax = problem.apply_a_block(next.x_hat - state.x_hat);

  // v_i+ = 1/2 (dl_i + sum_j w_ij dl_j) + (1 - gamma/2) v_i
  //        + (gamma/2) sum_j w_ij v_j + beta A_i (xhat_i+ - xhat_i)
  next.v.resize(static_cast<Eigen::Index>(n) * p);
  for (int i = 0; i < n; ++i) {
    VectorXd acc = 0.5 * (block_of(state.lambda, i, p) - block_of(state.lambda_prev, i, p));
    acc += (1.0 - 0.5 * steps.gamma) * block_of(state.v, i, p);
    for (int j = 0; j < n; ++j) {
      if (w(i, j) == 0.0) continue;
      acc += 0.5 * w(i, j) * (block_of(state.lambda, j, p) - block_of(state.lambda_prev, j, p));
      acc += 0.5 * steps.gamma * w(i, j) * block_of(state.v, j, p);
    }
    acc += steps.beta * block_of(ax, i, p);
    next.v.segment(static_cast<Eigen::Index>(i) * p, p) = acc;
  }

  next.lambda.resize(next.v.size());
  for (int i = 0; i < n; ++i)
    next.lambda.segment(static_cast<Eigen::Index>(i) * p, p) =
        conj_prox(problem.h, steps.beta / n, block_of(next.v, i, p));
  next.lambda_prev = state.lambda;
  next.y = state.y;
  next.k = state.k + 1;
  return next;
}

SolverState dcda_step(const SolverState& state, const Problem& problem, const MatrixXd& w,
                      const StepSizes& steps) {
  const int n = problem.n_agents();
  const int p = problem.p;
  if (w.rows() != n || w.cols() != n) throw std::invalid_argument("dcda_step: W size mismatch");

  SolverState next;
  next.x = problem.prox_g(
      steps.alpha,
      state.x - steps.alpha * (problem.grad_f(state.x) + problem.apply_at_block(state.lambda)));
  next.x_hat = next.x;  // theta = 0
  const VectorXd ax = problem.apply_a_block(next.x - state.x_hat);

  // v_i+ = dl_i + 1/2 (v_i + sum_j w_ij v_j) + beta A_i (x_i+ - x_i)
  next.v.resize(static_cast<Eigen::Index>(n) * p);
  for (int i = 0; i < n; ++i) {
    VectorXd acc = block_of(state.lambda, i, p) - block_of(state.lambda_prev, i, p);
    acc += 0.5 * block_of(state.v, i, p);
    for (int j = 0; j < n; ++j)
      if (w(i, j) != 0.0) acc += 0.5 * w(i, j) * block_of(state.v, j, p);
    acc += steps.beta * block_of(ax, i, p);
    next.v.segment(static_cast<Eigen::Index>(i) * p, p) = acc;
  }

  // lambda_i+ = prox((v_i+ + sum_j w_ij v_j+) / 2)
  next.lambda.resize(next.v.size());
  for (int i = 0; i < n; ++i) {
    VectorXd mixed = 0.5 * block_of(next.v, i, p);
    for (int j = 0; j < n; ++j)
      if (w(i, j) != 0.0) mixed += 0.5 * w(i, j) * block_of(next.v, j, p);
    next.lambda.segment(static_cast<Eigen::Index>(i) * p, p) =
        conj_prox(problem.h, steps.beta / n, mixed);
  }
  next.lambda_prev = state.lambda;
  next.y = state.y;
  next.k = state.k + 1;
  return next;
}

}  // namespace npga
