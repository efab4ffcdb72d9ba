#include "npga/schemes.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace npga {

const std::vector<std::string> scheme_names = {
    "NPGA-DIGing",       "NPGA-EXTRA", "NPGA-DLM",  "NPGA-P2D2", "NPGA-Aug-DGM",
    "NPGA-ATC-tracking", "NPGA-Exact-diffusion", "NPGA-NIDS", "NPGA-I", "NPGA-II"};

namespace {

std::string normalize(const std::string& name) {
  std::string out;
  for (char ch : name) {
    if (ch == '_' || ch == ' ') ch = '-';
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  if (out.rfind("npga-", 0) == 0) out = out.substr(5);
  return out;
}

}  // namespace

std::string canonical_scheme_name(const std::string& name) {
  const std::string key = normalize(name);
  if (key == "dcpa") return "DCPA";
  if (key == "dcda") return "DCDA";
  for (const auto& canon : scheme_names)
    if (normalize(canon) == key) return canon;
  throw std::invalid_argument("unknown scheme: " + name);
}

bool is_known_scheme(const std::string& name) {
  try {
    canonical_scheme_name(name);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

MatrixXd principal_sqrt(const MatrixXd& m, double tol) {
  if (m.rows() != m.cols()) throw std::invalid_argument("principal_sqrt: matrix must be square");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success) throw std::runtime_error("principal_sqrt: eigendecomposition failed");
  VectorXd eigs = es.eigenvalues();
  const double scale = std::max(1.0, std::abs(eigs(eigs.size() - 1)));
  for (Eigen::Index i = 0; i < eigs.size(); ++i) {
    if (eigs(i) < -tol * scale)
      throw std::invalid_argument("principal_sqrt: matrix is not positive semi-definite");
    // clamp the numerically-zero tail so the root shares the null space
    eigs(i) = eigs(i) <= tol * scale ? 0.0 : std::sqrt(eigs(i));
  }
  MatrixXd s = es.eigenvectors() * eigs.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (s + s.transpose());
}

NetworkScheme build_scheme(const std::string& name, const MixingMatrix& mix, double c_param,
                           std::optional<double> beta, bool use_w_prime) {
  std::string canon = canonical_scheme_name(name);
  NetworkScheme s;
  s.name = canon;

  if (canon == "DCPA") {
    canon = "NPGA-P2D2";
    c_param = 1.0;
    s.pinned_theta = 1.0;
  } else if (canon == "DCDA") {
    canon = "NPGA-Exact-diffusion";
    s.pinned_theta = 0.0;
    s.pinned_gamma = 1.0;
  }

  const int n = static_cast<int>(mix.w.rows());
  const MatrixXd identity = MatrixXd::Identity(n, n);
  const MatrixXd w = use_w_prime ? MatrixXd(0.5 * (identity + mix.w)) : mix.w;

  if (canon == "NPGA-DIGing") {
    s.b2 = (identity - w) * (identity - w);
    s.c = identity - w * w;
    s.d = identity;
    s.comm_rounds = 2;
  } else if (canon == "NPGA-EXTRA") {
    s.b2 = 0.5 * (identity - w);
    s.c = s.b2;
    s.d = identity;
    s.comm_rounds = 1;
  } else if (canon == "NPGA-DLM") {
    if (!beta) throw std::invalid_argument("NPGA-DLM requires beta at build time (B^2 = C = c*beta*L)");
    if (!mix.has_laplacian())
      throw std::invalid_argument("NPGA-DLM requires a mixing matrix with Laplacian provenance");
    s.b2 = c_param * (*beta) * mix.laplacian;
    s.c = s.b2;
    s.d = identity;
    s.comm_rounds = 1;
    const double top = sym_eigenvalues(s.b2).maxCoeff();
    if (top >= 1.0)
      s.warnings.push_back("NPGA-DLM: c*beta*eig_max(L) >= 1, Assumption 4(iii) will fail; reduce c or beta");
  } else if (canon == "NPGA-P2D2") {
    s.b2 = 0.5 * c_param * (identity - w);
    s.c = 0.5 * (identity - w);
    s.d = identity;
    s.comm_rounds = 1;
    if (c_param > 1.0) s.warnings.push_back("NPGA-P2D2: c > 1 is outside the documented range (needs c <= 1)");
  } else if (canon == "NPGA-Aug-DGM") {
    s.b2 = (identity - w) * (identity - w);
    s.c = MatrixXd::Zero(n, n);
    s.d = w * w;
    s.comm_rounds = 2;
  } else if (canon == "NPGA-ATC-tracking") {
    s.b2 = (identity - w) * (identity - w);
    s.c = identity - w;
    s.d = w;
    s.comm_rounds = 2;
  } else if (canon == "NPGA-Exact-diffusion") {
    s.b2 = 0.5 * (identity - w);
    s.c = MatrixXd::Zero(n, n);
    s.d = 0.5 * (identity + w);
    s.comm_rounds = 1;
  } else if (canon == "NPGA-NIDS") {
    s.b2 = c_param * (identity - w);
    s.c = MatrixXd::Zero(n, n);
    s.d = identity - c_param * (identity - w);
    s.comm_rounds = 1;
    if (c_param > 0.5) s.warnings.push_back("NPGA-NIDS: c > 1/2 is outside the documented range (needs c <= 1/2)");
  } else if (canon == "NPGA-I") {
    s.b2 = identity - w;
    s.c = MatrixXd::Zero(n, n);
    s.d = w * w;
    s.comm_rounds = 2;
  } else if (canon == "NPGA-II") {
    s.b2 = identity - w;
    s.c = identity - w;
    s.d = w;
    s.comm_rounds = 2;
  } else {
    throw std::invalid_argument("unknown scheme: " + name);
  }

  s.b2 = MatrixXd(0.5 * (s.b2 + s.b2.transpose().eval()));
  s.c = MatrixXd(0.5 * (s.c + s.c.transpose().eval()));
  s.d = MatrixXd(0.5 * (s.d + s.d.transpose().eval()));
  s.b = principal_sqrt(s.b2);
  return s;
}

namespace {

// Null(M) = Span(1): M 1 = 0, eigenvalue zero simple, rest above threshold.
AssumptionCheck null_space_is_ones(const MatrixXd& m, double tol) {
  AssumptionCheck out;
  const int n = static_cast<int>(m.rows());
  const VectorXd eigs = sym_eigenvalues(m);
  const double scale = std::max({1.0, std::abs(eigs(0)), std::abs(eigs(n - 1))});
  const double ones_residual = (m * VectorXd::Ones(n)).norm() / std::sqrt(static_cast<double>(n));
  const double second = n >= 2 ? eigs(1) : 0.0;
  out.pass = ones_residual <= tol * scale && std::abs(eigs(0)) <= tol * scale &&
             (n < 2 || second > tol * scale);
  out.witness = n >= 2 ? second : 0.0;
  if (!out.pass) {
    if (ones_residual > tol * scale)
      out.note = "ones vector is not in the null space";
    else
      out.note = "null space is larger than Span(1)";
  }
  return out;
}

AssumptionCheck psd_residual(const MatrixXd& residual, double tol) {
  AssumptionCheck out;
  const VectorXd eigs = sym_eigenvalues(0.5 * (residual + residual.transpose()));
  out.witness = eigs(0);
  out.pass = eigs(0) >= -tol;
  return out;
}

}  // namespace

AssumptionReport check_assumptions(const NetworkScheme& s, double tol) {
  const int n = s.n();
  if (s.c.rows() != n || s.d.rows() != n || s.c.cols() != n || s.d.cols() != n)
    throw std::invalid_argument("check_assumptions: dimension mismatch");
  const MatrixXd identity = MatrixXd::Identity(n, n);
  AssumptionReport rep;

  const double c_max_abs = s.c.cwiseAbs().maxCoeff();
  const bool c_is_zero = c_max_abs <= tol;

  // 4(i): C = 0 or Null(C) = Span(1)
  if (c_is_zero) {
    rep.a4_i.pass = true;
    rep.a4_i.note = "C = 0";
  } else {
    rep.a4_i = null_space_is_ones(s.c, tol);
  }

  // 4(ii): Null(B) = Span(1), equivalently Null(B^2) = Span(1)
  rep.a4_ii = null_space_is_ones(s.b2, tol);

  // 4(iii): 0 <= C < I and B^2 <= I
  {
    const VectorXd c_eigs = sym_eigenvalues(s.c);
    const VectorXd b2_eigs = sym_eigenvalues(s.b2);
    const bool c_ok = c_eigs(0) >= -tol && c_eigs(n - 1) < 1.0 - tol;
    const bool b2_ok = b2_eigs(n - 1) <= 1.0 + tol;
    rep.a4_iii.pass = c_ok && b2_ok;
    rep.a4_iii.witness = c_ok ? b2_eigs(n - 1) : c_eigs(n - 1);
    if (!c_ok)
      rep.a4_iii.note = "C violates 0 <= C < I";
    else if (!b2_ok)
      rep.a4_iii.note = "B^2 violates B^2 <= I";
  }

  // 4(iv): D symmetric, nonnegative, rows and columns sum to one
  {
    const double asym = (s.d - s.d.transpose()).cwiseAbs().maxCoeff();
    const double min_entry = s.d.minCoeff();
    const double row_err = (s.d * VectorXd::Ones(n) - VectorXd::Ones(n)).cwiseAbs().maxCoeff();
    rep.a4_iv.pass = asym <= tol && min_entry >= -tol && row_err <= tol;
    rep.a4_iv.witness = std::max({asym, row_err, std::max(0.0, -min_entry)});
    if (!rep.a4_iv.pass) rep.a4_iv.note = "D is not symmetric doubly stochastic";
  }

  // 6: Null(C) = Span(1), which C = 0 cannot satisfy
  if (c_is_zero) {
    rep.a6.pass = false;
    rep.a6.note = "C = 0";
  } else {
    rep.a6 = null_space_is_ones(s.c, tol);
  }

  // 7: D^2 <= I - B^2
  rep.a7 = psd_residual(identity - s.b2 - s.d * s.d, tol);

  // 9: D (I - C) D <= I - B^2
  rep.a9 = psd_residual(identity - s.b2 - s.d * (identity - s.c) * s.d, tol);

  return rep;
}

}  // namespace npga
