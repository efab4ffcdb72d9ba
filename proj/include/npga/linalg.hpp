#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>

namespace npga {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Deterministic 64-bit generator (splitmix64). We avoid <random>
// distributions so that identical seeds give identical streams on
// every platform and standard library.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // standard normal via Box-Muller
  double gaussian() {
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  VectorXd gaussian_vector(Eigen::Index n) {
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = gaussian();
    return v;
  }

  MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols) {
    MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = gaussian();
    return m;
  }
};

// Applies the Kronecker lift (M otimes I_p) to a stacked vector of n
// p-blocks without materializing the np x np matrix. Viewing v as a
// p x n matrix V (block i in column i), the result is V * M for
// symmetric M.
inline VectorXd apply_lifted(const MatrixXd& m, const VectorXd& v, Eigen::Index p) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n) throw std::invalid_argument("apply_lifted: matrix must be square");
  if (v.size() != n * p) throw std::invalid_argument("apply_lifted: vector/block size mismatch");
  Eigen::Map<const MatrixXd> blocks(v.data(), p, n);
  VectorXd out(n * p);
  Eigen::Map<MatrixXd>(out.data(), p, n) = blocks * m;
  return out;
}

// Dense Kronecker product M otimes I_p, used only where a lifted matrix
// is genuinely needed (the E/F certificates at desk scale).
inline MatrixXd kron_identity(const MatrixXd& m, Eigen::Index p) {
  const Eigen::Index n = m.rows();
  MatrixXd out = MatrixXd::Zero(n * p, n * p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out.block(i * p, j * p, p, p) = m(i, j) * MatrixXd::Identity(p, p);
  return out;
}

// Eigenvalues of a symmetric matrix, ascending.
inline VectorXd sym_eigenvalues(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  return es.eigenvalues();
}

// Smallest eigenvalue strictly above rel_tol * max(|eigs|). Throws if all
// eigenvalues sit below the threshold.
inline double smallest_nonzero_eigenvalue(const VectorXd& eigs_ascending, double rel_tol) {
  const double scale = std::max(std::abs(eigs_ascending(0)),
                                std::abs(eigs_ascending(eigs_ascending.size() - 1)));
  const double thr = rel_tol * std::max(scale, 1e-300);
  for (Eigen::Index i = 0; i < eigs_ascending.size(); ++i)
    if (eigs_ascending(i) > thr) return eigs_ascending(i);
  throw std::runtime_error("matrix has no eigenvalue above the zero threshold");
}

inline bool all_finite(const VectorXd& v) { return v.allFinite(); }

}  // namespace npga
