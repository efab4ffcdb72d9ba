#pragma once

#include "npga/problem.hpp"
#include "npga/schemes.hpp"
#include "npga/solver.hpp"

#include <string>

namespace npga {

struct OracleSolution {
  VectorXd x_star;       // d-vector
  VectorXd lambda_star;  // p-vector
  double kkt = 0.0;
  long iterations = 0;
  bool converged = false;
};

// Reference step sizes used by the centralized solver and by the KKT
// residual: alpha = 1/(2l), beta = mu/(2 sigma_max^2(A_full)) with a
// Chambolle-Pock-stability fallback when mu = 0, theta = 1.
StepSizes oracle_reference_steps(const Problem& problem);

// Centralized primal-dual proximal gradient iteration on the p-dimensional
// dual, run until the combined KKT residual drops below tol. Starts from
// zeros unless warm starts are given.
OracleSolution centralized_pga(const Problem& problem, double alpha, double beta, double theta,
                               long max_iters, double tol,
                               std::optional<VectorXd> x0 = std::nullopt,
                               std::optional<VectorXd> lambda0 = std::nullopt);

// Convenience wrapper with reference steps and the default tolerance ladder
// (1e-12, falling back to the achieved residual if the budget runs out).
OracleSolution solve_reference(const Problem& problem, double tol = 1e-12,
                               long max_iters = 2000000);

// ||x - prox_g(x - alpha (grad f + A^T lambda))|| + ||lambda - prox_{beta h*}(lambda + beta A x)||
// at the reference steps; zero exactly at a saddle point.
double kkt_residual(const Problem& problem, const VectorXd& x, const VectorXd& lambda_bar);

struct FixedPointResiduals {
  double opt_x = 0.0;      // stationarity of the x block
  double eq_v = 0.0;       // v* = lambda* - C lambda* - B y* + beta A x*
  double eq_bv = 0.0;      // B v* = 0
  double eq_prox = 0.0;    // lambda* = prox(D v*)
  double col_b_rel = 0.0;  // relative residual of rhs outside col(B)
  double max() const { return std::max({opt_x, eq_v, eq_bv, eq_prox}); }
};

struct FixedPoint {
  VectorXd x_star;       // d
  VectorXd lambda_star;  // p
  VectorXd v_star;       // p (the consensus block; the stacked v* is 1 (x) v_star)
  VectorXd y_star_c;     // np, the unique y* in col(B)
  double beta = 0.0;
  FixedPointResiduals residuals;

  VectorXd lambda_stacked(int n) const;
  VectorXd v_stacked(int n) const;
  SolverState as_state(const Problem& problem) const;
};

// Builds (x*, v*, y*_c, lambda*) from a centralized solution:
// v* = lambda* + (beta/n) A x*, and y*_c solves B y = rhs in col(B).
FixedPoint construct_fixed_point(const Problem& problem, const NetworkScheme& scheme, double beta,
                                 const VectorXd& x_star, const VectorXd& lambda_star);

std::string fixed_point_cache_key(const Problem& problem, double beta,
                                  const std::string& scheme_name);

// Hand-expanded single iterations of the two published special cases,
// coded directly from W for use as cross-check oracles.
SolverState dcpa_step(const SolverState& state, const Problem& problem, const MatrixXd& w,
                      const StepSizes& steps);
SolverState dcda_step(const SolverState& state, const Problem& problem, const MatrixXd& w,
                      const StepSizes& steps);

}  // namespace npga
