#pragma once

#include "npga/linalg.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace npga {

// Coupling function h acting on sum_i A_i x_i. Each alternative supplies a
// closed-form prox of its conjugate h*; Custom delegates to a user oracle.
struct IndicatorPoint {
  VectorXd b;
};

struct IndicatorBall {
  VectorXd center;
  double radius = 1.0;
};

// h(y) = weight * ||y - target||^2, smooth with l_h = 2 * weight.
struct SmoothQuadratic {
  VectorXd target;
  double weight = 0.5;
};

struct CustomCoupling {
  std::function<VectorXd(double, const VectorXd&)> conj_prox;  // (alpha, x) -> prox_{alpha h*}(x)
  std::optional<double> l_h;
};

using CouplingFunction = std::variant<IndicatorPoint, IndicatorBall, SmoothQuadratic, CustomCoupling>;

// Smoothness modulus of h when it exists (SmoothQuadratic or Custom with l_h).
std::optional<double> coupling_smoothness(const CouplingFunction& h);
bool coupling_is_indicator_point(const CouplingFunction& h);

// prox_{alpha h*}(x)
VectorXd conj_prox(const CouplingFunction& h, double alpha, const VectorXd& x);

// prox of h itself at step t: argmin_u h(u) + (1/(2t)) ||u - z||^2.
// Available for the closed-form alternatives; used by tests and the
// Moreau-identity checks.
VectorXd primal_prox(const CouplingFunction& h, double t, const VectorXd& z);

// Componentwise prox of alpha * ||.||_1.
VectorXd soft_threshold(double alpha, const VectorXd& x);

using GradOracle = std::function<VectorXd(const VectorXd&)>;
using ValueOracle = std::function<double(const VectorXd&)>;
using ProxOracle = std::function<VectorXd(double, const VectorXd&)>;  // (stepsize, v) -> prox

struct AgentSpec {
  int dim = 0;
  GradOracle f_grad;
  ValueOracle f_value;  // optional, used by property tests
  double mu = 0.0;      // strong convexity modulus of f_i
  double l = 0.0;       // smoothness modulus of f_i
  ProxOracle g_prox;    // empty means g_i = 0 (identity prox)
  MatrixXd a;           // p x dim coupling block
};

struct Problem {
  std::vector<AgentSpec> agents;
  CouplingFunction h;
  int p = 0;

  double mu = 0.0;                 // min_i mu_i
  double l = 0.0;                  // max_i l_i
  double sigma_max_a_block = 0.0;  // max_i sigma_max(A_i), the block-diagonal lift
  double sigma_max_a_full = 0.0;   // sigma_max([A_1, ..., A_n])
  MatrixXd a_full;                 // p x d concatenation

  std::vector<int> offsets;  // agent i owns x[offsets[i] .. offsets[i]+dim)
  int d_total = 0;

  int n_agents() const { return static_cast<int>(agents.size()); }

  VectorXd grad_f(const VectorXd& x) const;
  double f_value(const VectorXd& x) const;  // throws if any agent lacks the oracle
  VectorXd prox_g(double stepsize, const VectorXd& x) const;
  bool has_g() const;

  // Block-diagonal coupling: (A x)_i = A_i x_i stacked as n blocks of p.
  VectorXd apply_a_block(const VectorXd& x) const;
  // Transpose: (A^T lambda)_i = A_i^T lambda_i stacked as the d-vector.
  VectorXd apply_at_block(const VectorXd& lambda) const;
  // Blockwise prox_{alpha h*} applied to each of the n p-blocks.
  VectorXd conj_prox_blockwise(double alpha, const VectorXd& v) const;

  std::uint64_t structure_hash() const;
};

// Finalizes derived fields (offsets, moduli, A_full, spectral norms).
Problem finalize_problem(std::vector<AgentSpec> agents, CouplingFunction h, int p);

// min (1/2)||x||^2 + indicator(||X x - Y|| <= radius); one agent per
// partition entry, A_i the matching column block of X.
Problem build_ridge_problem(const MatrixXd& x_data, const VectorXd& y_data,
                            const std::vector<int>& partition, double radius);

// Regularized logistic regression with a slack-variable agent carrying the
// log-loss and A = -I_p; h is the indicator of {0}. `eps_reg` adds
// (eps/2)||z||^2 to the slack cost to restore strong convexity.
Problem build_logistic_problem(const MatrixXd& x_data, const VectorXd& labels,
                               const std::vector<int>& partition, double rho,
                               double eps_reg = 0.0);

// Elastic net: f_i quadratic, g_i = alpha_reg*rho*||.||_1 via soft threshold,
// h the sample-averaged quadratic fit term.
Problem build_elastic_net_problem(const MatrixXd& x_data, const VectorXd& y_data,
                                  const std::vector<int>& partition, double alpha_reg,
                                  double rho);

struct Dataset {
  MatrixXd x;
  VectorXd y;
};

// Numeric CSV, last column the label. Features optionally standardized to
// zero mean and unit population variance; an intercept column of ones can
// be appended after standardization.
Dataset load_csv_dataset(const std::string& path, bool standardize, bool add_intercept);
Dataset parse_csv_dataset(const std::string& text, bool standardize, bool add_intercept);

// X = U diag(sigma) V^T with geometric singular values spanning `cond`
// (largest 1, smallest 1/cond) and Y = X theta_true + small noise. In
// full-row-rank mode p > d is rejected; otherwise any shape is allowed.
Dataset synthesize_dataset(int p, int d, double cond, std::uint64_t seed,
                           bool full_row_rank = true);

}  // namespace npga
