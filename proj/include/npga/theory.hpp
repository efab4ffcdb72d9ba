#pragma once

#include "npga/problem.hpp"
#include "npga/schemes.hpp"
#include "npga/solver.hpp"

#include <optional>
#include <string>

namespace npga {

struct FixedPoint;

// The four certified regimes. Case1 covers g = 0 with full-row-rank A;
// Case1ATC adds D^2 <= I - B^2 and relaxes the gamma bound; Indicator is
// the point-indicator coupling with theta = 0; Smooth requires l_h.
enum class RateCase { Case1, Case1ATC, Indicator, Smooth };

RateCase rate_case_from_string(const std::string& name);
std::string rate_case_to_string(RateCase c);

struct SpectralQuantities {
  double sigma_max_c = 0.0;      // largest eigenvalue of C
  double sigma_max_b = 0.0;      // sqrt of largest eigenvalue of B^2
  double sigma_min_nz_b = 0.0;   // sqrt of smallest nonzero eigenvalue of B^2
  double sigma_max_a_block = 0.0;
};

SpectralQuantities spectral_quantities(const NetworkScheme& scheme, const Problem& problem,
                                       double tol = 1e-9);

struct LiftedMatrix {
  MatrixXd m;              // np x np
  double eta_min = 0.0;    // smallest eigenvalue
  bool positive_definite = false;
};

// E = A A^T + (1 / (2 alpha beta)) C, lifted blockwise to np x np.
LiftedMatrix build_e_matrix(const Problem& problem, const MatrixXd& c, double alpha, double beta,
                            double tol = 1e-9);
// F = D A A^T D + ((1 - gamma) / (alpha beta)) B^2, lifted likewise.
LiftedMatrix build_f_matrix(const Problem& problem, const NetworkScheme& scheme, double alpha,
                            double beta, double gamma, double tol = 1e-9);

struct Bound {
  double value = 0.0;
  bool open = true;  // strict inequality
};

struct RateCertificate {
  RateCase which = RateCase::Case1;
  Bound alpha_max;
  Bound beta_max;
  Bound gamma_max;
  bool gamma_depends_on_alpha_beta = false;

  StepSizes steps;

  double delta = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double omega = 0.0;

  SpectralQuantities spectral;
  double eta_min_e = std::numeric_limits<double>::quiet_NaN();
  double eta_min_f = std::numeric_limits<double>::quiet_NaN();
  double l_h = std::numeric_limits<double>::quiet_NaN();
  double mu = 0.0;
  double l = 0.0;
};

// Throws assumption_error naming the culprit when the case's assumptions
// fail on (problem, scheme).
void require_case_assumptions(RateCase which, const Problem& problem, const NetworkScheme& scheme,
                              double tol = 1e-9);

// Admissible box. The gamma bound of Case1 and Smooth depends on the chosen
// (alpha, beta); gamma_max is left NaN with the flag set until steps exist.
RateCertificate step_bounds(RateCase which, const Problem& problem, const NetworkScheme& scheme,
                            double theta);

// Resolves the gamma bound once alpha and beta are fixed.
Bound gamma_bound(RateCase which, const Problem& problem, const NetworkScheme& scheme,
                  double alpha, double beta);

// Steps at `safety` times each bound (open and closed alike), gamma last.
StepSizes suggest_steps(RateCase which, const Problem& problem, const NetworkScheme& scheme,
                        double theta, double safety = 0.9);

// Same selection rule with the case assumptions skipped; backs the forced
// mode, where a run proceeds without a certificate.
StepSizes suggest_steps_unchecked(RateCase which, const Problem& problem,
                                  const NetworkScheme& scheme, double theta, double safety = 0.9);

// Full certificate for concrete steps; refuses steps outside the box with
// the violated inequality. `strict_factor` defines "inside" for open bounds.
RateCertificate rate_certificate(RateCase which, const Problem& problem,
                                 const NetworkScheme& scheme, const StepSizes& steps,
                                 double strict_factor = 0.999);

// The theorem-matching weighted error sum at `state` relative to the fixed
// point; contracts by certificate.delta along a solver trajectory.
double lyapunov_value(const RateCertificate& certificate, const SolverState& state,
                      const FixedPoint& fp, const Problem& problem, const NetworkScheme& scheme);

struct assumption_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace npga
