#include "npga/graph.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace npga {

namespace {

void check_valid(const Graph& g) {
  if (g.n < 1) throw std::invalid_argument("graph: node count must be >= 1");
  for (const auto& [i, j] : g.edges) {
    if (i == j) throw std::invalid_argument("graph: self-loop");
    if (i < 0 || j < 0 || i >= g.n || j >= g.n)
      throw std::invalid_argument("graph: edge index out of range");
  }
}

std::pair<int, int> ordered(int i, int j) { return i < j ? std::make_pair(i, j) : std::make_pair(j, i); }

}  // namespace

bool Graph::has_edge(int i, int j) const {
  const auto e = ordered(i, j);
  return std::find(edges.begin(), edges.end(), e) != edges.end();
}

std::vector<int> Graph::degrees() const {
  std::vector<int> deg(static_cast<size_t>(n), 0);
  for (const auto& [i, j] : edges) {
    ++deg[static_cast<size_t>(i)];
    ++deg[static_cast<size_t>(j)];
  }
  return deg;
}

Graph erdos_renyi(int n, double prob, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("erdos_renyi: need at least 2 nodes");
  if (!(prob > 0.0) || prob > 1.0) throw std::invalid_argument("erdos_renyi: prob must be in (0, 1]");
  Rng rng(seed);
  Graph g;
  g.n = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < prob) g.edges.emplace_back(i, j);
  return g;
}

Graph erdos_renyi_connected(int n, double prob, std::uint64_t seed, int* attempts) {
  constexpr int max_attempts = 10000;
  for (int a = 0; a < max_attempts; ++a) {
    Graph g = erdos_renyi(n, prob, seed + static_cast<std::uint64_t>(a));
    if (is_connected(g)) {
      if (attempts) *attempts = a + 1;
      return g;
    }
  }
  throw std::runtime_error("erdos_renyi_connected: no connected draw after 10000 attempts");
}

bool is_connected(const Graph& g) {
  check_valid(g);
  if (g.n == 1) return true;
  std::vector<std::vector<int>> adj(static_cast<size_t>(g.n));
  for (const auto& [i, j] : g.edges) {
    adj[static_cast<size_t>(i)].push_back(j);
    adj[static_cast<size_t>(j)].push_back(i);
  }
  std::vector<char> seen(static_cast<size_t>(g.n), 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int count = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : adj[static_cast<size_t>(u)]) {
      if (!seen[static_cast<size_t>(v)]) {
        seen[static_cast<size_t>(v)] = 1;
        ++count;
        q.push(v);
      }
    }
  }
  return count == g.n;
}

LaplacianMatrix laplacian(const Graph& g) {
  check_valid(g);
  LaplacianMatrix out;
  out.degrees = g.degrees();
  out.l = MatrixXd::Zero(g.n, g.n);
  for (const auto& [i, j] : g.edges) {
    out.l(i, j) -= 1.0;
    out.l(j, i) -= 1.0;
    out.l(i, i) += 1.0;
    out.l(j, j) += 1.0;
  }
  return out;
}

MixingMatrix mixing_matrix_laplacian(const Graph& g, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("mixing_matrix_laplacian: c must be > 0");
  if (!is_connected(g)) throw std::invalid_argument("mixing_matrix_laplacian: graph must be connected");
  const LaplacianMatrix lap = laplacian(g);
  const int max_deg = lap.degrees.empty() ? 0 : *std::max_element(lap.degrees.begin(), lap.degrees.end());
  MixingMatrix mix;
  mix.tau = static_cast<double>(max_deg) + c;
  mix.laplacian = lap.l;
  mix.w = MatrixXd::Identity(g.n, g.n) - lap.l / mix.tau;
  return mix;
}

MixingValidationReport validate_mixing(const MixingMatrix& mix, const Graph& g, double tol) {
  const MatrixXd& w = mix.w;
  if (w.rows() != w.cols() || w.rows() != g.n)
    throw std::invalid_argument("validate_mixing: dimension mismatch");
  MixingValidationReport rep;

  rep.symmetry.witness = (w - w.transpose()).cwiseAbs().maxCoeff();
  rep.symmetry.pass = rep.symmetry.witness <= tol;

  // w_ij > 0 iff i == j or (i, j) is an edge, otherwise w_ij == 0
  double worst = 0.0;
  bool sparsity_ok = true;
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      const bool should_be_positive = (i == j) || g.has_edge(i, j);
      if (should_be_positive) {
        if (w(i, j) <= tol) {
          sparsity_ok = false;
          worst = std::max(worst, std::abs(w(i, j)));
        }
      } else if (std::abs(w(i, j)) > tol) {
        sparsity_ok = false;
        worst = std::max(worst, std::abs(w(i, j)));
      }
    }
  }
  rep.sparsity.pass = sparsity_ok;
  rep.sparsity.witness = worst;

  const VectorXd eigs = sym_eigenvalues(0.5 * (w + w.transpose()));
  const int n = g.n;

  // Null(I - W) = Span(1): largest eigenvalue 1 with eigenvector 1_n and,
  // on connected graphs, the second largest strictly below 1.
  const VectorXd ones = VectorXd::Ones(n);
  const double ones_residual = (w * ones - ones).norm();
  double lambda2_gap = 1.0;  // 1 - second largest eigenvalue of W
  if (n >= 2) lambda2_gap = 1.0 - eigs(n - 2);
  rep.null_space.witness = std::max(ones_residual, std::abs(1.0 - eigs(n - 1)));
  rep.null_space.pass = ones_residual <= tol && std::abs(eigs(n - 1) - 1.0) <= tol &&
                        (n == 1 || lambda2_gap > tol);

  rep.spectrum.witness = eigs(0);
  rep.spectrum.pass = eigs(0) > -1.0 + tol && eigs(n - 1) <= 1.0 + tol;
  return rep;
}

std::string graph_to_edge_list(const Graph& g) {
  check_valid(g);
  std::ostringstream os;
  os << g.n << " " << g.edges.size() << "\n";
  for (const auto& [i, j] : g.edges) os << i << " " << j << "\n";
  return os.str();
}

Graph graph_from_edge_list(const std::string& text) {
  std::istringstream is(text);
  Graph g;
  size_t m = 0;
  if (!(is >> g.n >> m)) throw std::invalid_argument("graph_from_edge_list: bad header");
  for (size_t k = 0; k < m; ++k) {
    int i, j;
    if (!(is >> i >> j)) throw std::invalid_argument("graph_from_edge_list: truncated edge list");
    g.edges.push_back(ordered(i, j));
  }
  check_valid(g);
  std::sort(g.edges.begin(), g.edges.end());
  if (std::adjacent_find(g.edges.begin(), g.edges.end()) != g.edges.end())
    throw std::invalid_argument("graph_from_edge_list: duplicate edge");
  return g;
}

Graph read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return graph_from_edge_list(ss.str());
}

void write_graph_file(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write graph file: " + path);
  out << graph_to_edge_list(g);
}

Graph path_graph(int n) {
  Graph g;
  g.n = n;
  for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
  return g;
}

Graph ring_graph(int n) {
  Graph g = path_graph(n);
  if (n >= 3) g.edges.emplace_back(0, n - 1);
  return g;
}

Graph complete_graph(int n) {
  Graph g;
  g.n = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.edges.emplace_back(i, j);
  return g;
}

}  // namespace npga
