#pragma once

#include "npga/graph.hpp"
#include "npga/linalg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace npga {

// One network-matrix variant of the iteration: the (B^2, C, D) triple plus
// the number of communication rounds it costs per iteration.
struct NetworkScheme {
  std::string name;
  MatrixXd b2;  // B^2
  MatrixXd c;
  MatrixXd d;
  MatrixXd b;  // symmetric PSD principal square root of b2
  int comm_rounds = 1;

  // Aliases pin parts of the step-size tuple (DCPA: theta = 1,
  // DCDA: theta = 0 and gamma = 1).
  std::optional<double> pinned_theta;
  std::optional<double> pinned_gamma;

  std::vector<std::string> warnings;

  int n() const { return static_cast<int>(b2.rows()); }
};

struct AssumptionCheck {
  bool pass = false;
  double witness = 0.0;
  std::string note;
};

// Assumption 4 parts (i)-(iv) plus the scheme-level conditions 6, 7, 9.
struct AssumptionReport {
  AssumptionCheck a4_i;    // C = 0 or Null(C) = Span(1)
  AssumptionCheck a4_ii;   // Null(B^2) = Span(1)
  AssumptionCheck a4_iii;  // 0 <= C < I and B^2 <= I
  AssumptionCheck a4_iv;   // D symmetric doubly stochastic
  AssumptionCheck a6;      // Null(C) = Span(1)
  AssumptionCheck a7;      // D^2 <= I - B^2
  AssumptionCheck a9;      // D (I - C) D <= I - B^2

  bool a4() const { return a4_i.pass && a4_ii.pass && a4_iii.pass && a4_iv.pass; }
};

extern const std::vector<std::string> scheme_names;  // the ten table rows
bool is_known_scheme(const std::string& name);
std::string canonical_scheme_name(const std::string& name);

// Builds a named scheme from a mixing matrix. `use_w_prime` substitutes
// W' = (I + W)/2 before applying the table row, needed by the schemes whose
// B^2 <= I check fails on a raw mixing matrix. DLM requires `beta` and a
// mixing matrix with Laplacian provenance.
NetworkScheme build_scheme(const std::string& name, const MixingMatrix& mix,
                           double c_param = 1.0,
                           std::optional<double> beta = std::nullopt,
                           bool use_w_prime = false);

// Principal square root of a symmetric PSD matrix via dense symmetric
// eigendecomposition. Eigenvalues below -tol are rejected; the tail in
// [-tol, 0) is clamped to zero.
MatrixXd principal_sqrt(const MatrixXd& m, double tol = 1e-10);

AssumptionReport check_assumptions(const NetworkScheme& s, double tol = 1e-9);

}  // namespace npga
