#include "npga/theory.hpp"

#include "npga/oracle.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace npga {

RateCase rate_case_from_string(const std::string& name) {
  std::string key;
  for (char ch : name) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  if (key == "case1") return RateCase::Case1;
  if (key == "case1_atc" || key == "case1-atc" || key == "case1atc") return RateCase::Case1ATC;
  if (key == "indicator") return RateCase::Indicator;
  if (key == "smooth") return RateCase::Smooth;
  throw std::invalid_argument("unknown rate case: " + name);
}

std::string rate_case_to_string(RateCase c) {
  switch (c) {
    case RateCase::Case1: return "Case1";
    case RateCase::Case1ATC: return "Case1_ATC";
    case RateCase::Indicator: return "Indicator";
    case RateCase::Smooth: return "Smooth";
  }
  return "?";
}

SpectralQuantities spectral_quantities(const NetworkScheme& scheme, const Problem& problem,
                                       double tol) {
  SpectralQuantities q;
  const VectorXd c_eigs = sym_eigenvalues(scheme.c);
  q.sigma_max_c = std::max(std::abs(c_eigs(0)), std::abs(c_eigs(c_eigs.size() - 1)));

  const VectorXd b2_eigs = sym_eigenvalues(scheme.b2);
  const double b2_max = b2_eigs(b2_eigs.size() - 1);
  if (b2_max <= tol) throw std::invalid_argument("spectral_quantities: B^2 = 0 has no nonzero eigenvalue");
  q.sigma_max_b = std::sqrt(b2_max);
  q.sigma_min_nz_b = std::sqrt(smallest_nonzero_eigenvalue(b2_eigs, tol));
  q.sigma_max_a_block = problem.sigma_max_a_block;
  return q;
}

namespace {

// blockdiag(A_i A_i^T), the np x np lift of A A^T.
MatrixXd block_aat(const Problem& problem) {
  const int n = problem.n_agents();
  const int p = problem.p;
  MatrixXd out = MatrixXd::Zero(static_cast<Eigen::Index>(n) * p, static_cast<Eigen::Index>(n) * p);
  for (int i = 0; i < n; ++i)
    out.block(static_cast<Eigen::Index>(i) * p, static_cast<Eigen::Index>(i) * p, p, p) =
        problem.agents[static_cast<size_t>(i)].a * problem.agents[static_cast<size_t>(i)].a.transpose();
  return out;
}

LiftedMatrix finish_lifted(MatrixXd m, double tol) {
  LiftedMatrix out;
  out.m = 0.5 * (m + m.transpose());
  const VectorXd eigs = sym_eigenvalues(out.m);
  out.eta_min = eigs(0);
  out.positive_definite = eigs(0) > tol * std::max(eigs(eigs.size() - 1), 0.0);
  return out;
}

}  // namespace

LiftedMatrix build_e_matrix(const Problem& problem, const MatrixXd& c, double alpha, double beta,
                            double tol) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("build_e_matrix: steps must be > 0");
  MatrixXd e = block_aat(problem) + kron_identity(c, problem.p) / (2.0 * alpha * beta);
  return finish_lifted(std::move(e), tol);
}

LiftedMatrix build_f_matrix(const Problem& problem, const NetworkScheme& scheme, double alpha,
                            double beta, double gamma, double tol) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("build_f_matrix: steps must be > 0");
  if (!(gamma < 1.0)) throw std::invalid_argument("build_f_matrix: gamma must be < 1");
  const MatrixXd d_lift = kron_identity(scheme.d, problem.p);
  MatrixXd f = d_lift * block_aat(problem) * d_lift +
               ((1.0 - gamma) / (alpha * beta)) * kron_identity(scheme.b2, problem.p);
  return finish_lifted(std::move(f), tol);
}

namespace {

bool a_full_has_full_row_rank(const Problem& problem) {
  const auto sv = problem.a_full.jacobiSvd().singularValues();
  if (problem.a_full.rows() > problem.a_full.cols()) return false;
  return sv(sv.size() - 1) > 1e-10 * sv(0);
}

[[noreturn]] void fail(const std::string& what) { throw assumption_error(what); }

}  // namespace

void require_case_assumptions(RateCase which, const Problem& problem, const NetworkScheme& scheme,
                              double tol) {
  const AssumptionReport rep = check_assumptions(scheme, tol);
  if (!rep.a4_i.pass) fail("Assumption 4(i) fails: " + rep.a4_i.note);
  if (!rep.a4_ii.pass) fail("Assumption 4(ii) fails: " + rep.a4_ii.note);
  if (!rep.a4_iii.pass) fail("Assumption 4(iii) fails: " + rep.a4_iii.note);
  if (!rep.a4_iv.pass) fail("Assumption 4(iv) fails: " + rep.a4_iv.note);
  if (!(problem.mu > 0.0))
    fail("strong convexity fails: mu = 0 (every certified case needs mu > 0)");

  switch (which) {
    case RateCase::Case1:
    case RateCase::Case1ATC:
      if (problem.has_g()) fail("Case1 requires g = 0");
      if (!a_full_has_full_row_rank(problem)) fail("Case1 requires [A_1, ..., A_n] with full row rank");
      if (!rep.a6.pass) fail("Assumption 6 fails: Null(C) must equal Span(1), got " + rep.a6.note);
      if (which == RateCase::Case1ATC && !rep.a7.pass)
        fail("Assumption 7 fails: D^2 <= I - B^2 (witness eigenvalue " +
             std::to_string(rep.a7.witness) + ")");
      break;
    case RateCase::Indicator:
      if (problem.has_g()) fail("Indicator case requires g = 0");
      if (!a_full_has_full_row_rank(problem))
        fail("Indicator case requires [A_1, ..., A_n] with full row rank");
      if (!coupling_is_indicator_point(problem.h))
        fail("Indicator case requires h to be a point indicator");
      if (!rep.a9.pass)
        fail("Assumption 9 fails: D(I-C)D <= I - B^2 (witness eigenvalue " +
             std::to_string(rep.a9.witness) + ")");
      break;
    case RateCase::Smooth:
      if (!coupling_smoothness(problem.h))
        fail("Smooth case requires a coupling with a known smoothness modulus l_h");
      break;
  }
}

namespace {

RateCertificate step_bounds_impl(RateCase which, const Problem& problem,
                                 const NetworkScheme& scheme, double theta, bool enforce) {
  if (theta < 0.0) throw std::invalid_argument("theta must be >= 0");
  if (which == RateCase::Indicator && theta != 0.0)
    fail("Indicator case requires theta = 0");
  if (enforce) require_case_assumptions(which, problem, scheme);
  if (!(problem.mu > 0.0)) fail("step bounds need mu > 0");

  RateCertificate cert;
  cert.which = which;
  cert.spectral = spectral_quantities(scheme, problem);
  cert.mu = problem.mu;
  cert.l = problem.l;
  cert.steps.theta = theta;
  if (const auto lh = coupling_smoothness(problem.h)) cert.l_h = *lh;

  const double mu = problem.mu;
  const double l = problem.l;
  const double sc = cert.spectral.sigma_max_c;
  const double sa2 = cert.spectral.sigma_max_a_block * cert.spectral.sigma_max_a_block;

  switch (which) {
    case RateCase::Case1:
    case RateCase::Case1ATC:
      cert.alpha_max = {1.0 / (l * (1.0 + 2.0 * theta)), true};
      cert.beta_max = {mu / (sa2 * (1.0 / (1.0 - sc) + theta)), false};
      if (which == RateCase::Case1) {
        cert.gamma_depends_on_alpha_beta = true;
        cert.gamma_max = {std::numeric_limits<double>::quiet_NaN(), true};
      } else {
        cert.gamma_max = {1.0, true};
      }
      break;
    case RateCase::Indicator:
      cert.alpha_max = {1.0 / l, true};
      cert.beta_max = {mu * (1.0 - sc) / sa2, false};
      cert.gamma_max = {1.0, true};
      break;
    case RateCase::Smooth:
      cert.alpha_max = {std::min(mu / (l * l * (1.0 + 2.0 * theta)), 1.0 / (2.0 * l - mu)), true};
      cert.beta_max = {mu / (sa2 * (1.0 / (1.0 - sc) + theta)), false};
      cert.gamma_depends_on_alpha_beta = true;
      cert.gamma_max = {std::numeric_limits<double>::quiet_NaN(), true};
      break;
  }
  return cert;
}

}  // namespace

RateCertificate step_bounds(RateCase which, const Problem& problem, const NetworkScheme& scheme,
                            double theta) {
  return step_bounds_impl(which, problem, scheme, theta, true);
}

Bound gamma_bound(RateCase which, const Problem& problem, const NetworkScheme& scheme,
                  double alpha, double beta) {
  const SpectralQuantities q = spectral_quantities(scheme, problem);
  switch (which) {
    case RateCase::Case1: {
      const LiftedMatrix e = build_e_matrix(problem, scheme.c, alpha, beta);
      if (!e.positive_definite)
        fail("E = A A^T + C/(2 alpha beta) is not positive definite (eta_min = " +
             std::to_string(e.eta_min) + ")");
      const double cap = alpha * beta * e.eta_min / (q.sigma_max_b * q.sigma_max_b);
      return {std::min(1.0, cap), true};
    }
    case RateCase::Case1ATC:
    case RateCase::Indicator:
      return {1.0, true};
    case RateCase::Smooth: {
      const auto lh = coupling_smoothness(problem.h);
      if (!lh) fail("Smooth case requires l_h");
      const double q1 = 1.0 + beta / *lh;
      const double cap = (q1 * q1 - 1.0) / (q1 * q1 * q.sigma_max_b * q.sigma_max_b);
      return {std::min(1.0, cap), true};
    }
  }
  throw std::logic_error("unreachable");
}

namespace {

StepSizes suggest_steps_impl(RateCase which, const Problem& problem, const NetworkScheme& scheme,
                             double theta, double safety, bool enforce) {
  if (!(safety > 0.0) || safety >= 1.0)
    throw std::invalid_argument("safety factor must lie in (0, 1)");
  const RateCertificate bounds = step_bounds_impl(which, problem, scheme, theta, enforce);
  StepSizes s;
  s.theta = theta;
  s.alpha = safety * bounds.alpha_max.value;
  s.beta = safety * bounds.beta_max.value;
  try {
    s.gamma = safety * gamma_bound(which, problem, scheme, s.alpha, s.beta).value;
  } catch (const assumption_error&) {
    if (enforce) throw;
    s.gamma = safety;  // forced mode without a usable E: fall back to the gamma < 1 cap
  }
  return s;
}

}  // namespace

StepSizes suggest_steps(RateCase which, const Problem& problem, const NetworkScheme& scheme,
                        double theta, double safety) {
  return suggest_steps_impl(which, problem, scheme, theta, safety, true);
}

StepSizes suggest_steps_unchecked(RateCase which, const Problem& problem,
                                  const NetworkScheme& scheme, double theta, double safety) {
  return suggest_steps_impl(which, problem, scheme, theta, safety, false);
}

RateCertificate rate_certificate(RateCase which, const Problem& problem,
                                 const NetworkScheme& scheme, const StepSizes& steps,
                                 double strict_factor) {
  validate_steps(steps);
  RateCertificate cert = step_bounds(which, problem, scheme, steps.theta);
  cert.steps = steps;

  auto check_bound = [&](const char* name, double value, const Bound& bound) {
    const double limit = bound.open ? strict_factor * bound.value : bound.value * (1.0 + 1e-12);
    if (!(value <= limit)) {
      std::ostringstream msg;
      msg << "step " << name << " = " << value << " violates the bound " << name
          << (bound.open ? " < " : " <= ") << bound.value << " ("
          << rate_case_to_string(which) << ")";
      throw std::domain_error(msg.str());
    }
  };
  check_bound("alpha", steps.alpha, cert.alpha_max);
  check_bound("beta", steps.beta, cert.beta_max);
  cert.gamma_max = gamma_bound(which, problem, scheme, steps.alpha, steps.beta);
  check_bound("gamma", steps.gamma, cert.gamma_max);

  const double alpha = steps.alpha;
  const double beta = steps.beta;
  const double gamma = steps.gamma;
  const double theta = steps.theta;
  const double mu = problem.mu;
  const double l = problem.l;
  const double sc = cert.spectral.sigma_max_c;
  const double sa2 = cert.spectral.sigma_max_a_block * cert.spectral.sigma_max_a_block;
  const double sb2 = cert.spectral.sigma_max_b * cert.spectral.sigma_max_b;
  const double sb_min2 = cert.spectral.sigma_min_nz_b * cert.spectral.sigma_min_nz_b;

  cert.c1 = 1.0 - alpha * beta * sa2 * (1.0 / (1.0 - sc) + theta);
  cert.c2 = alpha / beta;
  cert.c3 = alpha / (beta * gamma);
  cert.omega = 1.0 - gamma * sb2;
  cert.delta3 = 1.0 - gamma * sb_min2;

  switch (which) {
    case RateCase::Case1:
    case RateCase::Case1ATC: {
      const LiftedMatrix e = build_e_matrix(problem, scheme.c, alpha, beta);
      cert.eta_min_e = e.eta_min;
      cert.delta1 = 1.0 - alpha * mu * (1.0 - alpha * l * (1.0 + 2.0 * theta));
      cert.delta2 = 1.0 - alpha * beta * e.eta_min;
      cert.delta = which == RateCase::Case1
                       ? std::max({cert.delta1, cert.delta2 / cert.omega, cert.delta3})
                       : std::max({cert.delta1, cert.delta2, cert.delta3});
      break;
    }
    case RateCase::Indicator: {
      const LiftedMatrix f = build_f_matrix(problem, scheme, alpha, beta, gamma);
      if (!f.positive_definite)
        fail("F = D A A^T D + (1-gamma)/(alpha beta) B^2 is not positive definite (eta_min = " +
             std::to_string(f.eta_min) + ")");
      cert.eta_min_f = f.eta_min;
      cert.delta1 = 1.0 - alpha * mu * (1.0 - alpha * l);
      cert.delta2 = 1.0 - alpha * beta * f.eta_min;
      cert.delta = std::max({cert.delta1, cert.delta2, cert.delta3});
      break;
    }
    case RateCase::Smooth: {
      const double q1 = 1.0 + beta / cert.l_h;
      cert.delta1 = 1.0 - alpha * (mu - 2.0 * theta * alpha * l * l);
      cert.delta2 = 1.0 / (q1 * q1 * cert.omega);
      cert.delta = std::max({cert.delta1, cert.delta2, cert.delta3});
      break;
    }
  }

  if (!(cert.c1 > 0.0)) throw std::domain_error("certificate refused: c1 <= 0");
  if (!(cert.delta > 0.0 && cert.delta < 1.0))
    throw std::domain_error("certificate refused: delta = " + std::to_string(cert.delta) +
                            " is not in (0, 1)");
  return cert;
}

double lyapunov_value(const RateCertificate& cert, const SolverState& state, const FixedPoint& fp,
                      const Problem& problem, const NetworkScheme& scheme) {
  const int n = problem.n_agents();
  const int p = problem.p;
  const VectorXd x_err = state.x - fp.x_star;
  const VectorXd lambda_err = state.lambda - fp.lambda_stacked(n);
  const VectorXd y_err = state.y - fp.y_star_c;

  switch (cert.which) {
    case RateCase::Case1:
      return (cert.c1 / cert.omega) * x_err.squaredNorm() + cert.c2 * lambda_err.squaredNorm() +
             (cert.c3 / cert.omega) * y_err.squaredNorm();
    case RateCase::Case1ATC:
      return cert.c1 * x_err.squaredNorm() + cert.c2 * lambda_err.squaredNorm() +
             cert.c3 * y_err.squaredNorm();
    case RateCase::Indicator: {
      const VectorXd v_err = state.v - fp.v_stacked(n);
      const double weighted =
          v_err.squaredNorm() - cert.steps.gamma * v_err.dot(apply_lifted(scheme.b2, v_err, p));
      return cert.c1 * x_err.squaredNorm() + cert.c2 * weighted + cert.c3 * y_err.squaredNorm();
    }
    case RateCase::Smooth:
      return cert.delta2 * x_err.squaredNorm() + cert.c2 * lambda_err.squaredNorm() +
             cert.c3 * cert.delta2 * y_err.squaredNorm();
  }
  throw std::logic_error("unreachable");
}

}  // namespace npga
