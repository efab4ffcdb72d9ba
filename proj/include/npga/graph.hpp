#pragma once

#include "npga/linalg.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace npga {

// Undirected simple graph on nodes 0..n-1.
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // each pair (i, j) with i < j, unique

  bool has_edge(int i, int j) const;
  std::vector<int> degrees() const;
};

// Symmetric mixing matrix associated with a graph. When built by the
// Laplacian method we keep tau and the Laplacian itself so schemes that
// need L directly (DLM) can recover it exactly.
struct MixingMatrix {
  MatrixXd w;
  double tau = 0.0;    // 0 when unknown provenance
  MatrixXd laplacian;  // empty when unknown provenance

  bool has_laplacian() const { return laplacian.size() > 0; }
};

struct LaplacianMatrix {
  MatrixXd l;
  std::vector<int> degrees;
};

struct PropertyCheck {
  bool pass = false;
  double witness = 0.0;  // offending magnitude (residual / eigenvalue)
};

struct MixingValidationReport {
  PropertyCheck symmetry;
  PropertyCheck sparsity;    // sign pattern matches the graph
  PropertyCheck null_space;  // Null(I - W) = Span(1)
  PropertyCheck spectrum;    // eigenvalues in (-1, 1]
  bool all_pass() const {
    return symmetry.pass && sparsity.pass && null_space.pass && spectrum.pass;
  }
};

// Erdos-Renyi draw: every pair included independently with probability
// prob under the seeded deterministic generator.
Graph erdos_renyi(int n, double prob, std::uint64_t seed);

// Resamples with incremented seed until the draw is connected.
// `attempts`, when non-null, receives the number of draws used.
Graph erdos_renyi_connected(int n, double prob, std::uint64_t seed, int* attempts = nullptr);

bool is_connected(const Graph& g);

LaplacianMatrix laplacian(const Graph& g);

// Laplacian method: W = I - L / tau with tau = max degree + c.
MixingMatrix mixing_matrix_laplacian(const Graph& g, double c = 1.0);

MixingValidationReport validate_mixing(const MixingMatrix& w, const Graph& g, double tol = 1e-9);

// Edge-list text format: first line "n m", then m lines "i j".
std::string graph_to_edge_list(const Graph& g);
Graph graph_from_edge_list(const std::string& text);
Graph read_graph_file(const std::string& path);
void write_graph_file(const Graph& g, const std::string& path);

// Convenience generators used by tests.
Graph path_graph(int n);
Graph ring_graph(int n);
Graph complete_graph(int n);

}  // namespace npga
