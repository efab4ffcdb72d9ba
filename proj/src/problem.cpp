#include "npga/problem.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace npga {

namespace {

VectorXd project_ball(const VectorXd& z, const VectorXd& center, double radius) {
  const VectorXd diff = z - center;
  const double dist = diff.norm();
  if (dist <= radius) return z;
  return center + (radius / dist) * diff;
}

}  // namespace

std::optional<double> coupling_smoothness(const CouplingFunction& h) {
  if (const auto* q = std::get_if<SmoothQuadratic>(&h)) return 2.0 * q->weight;
  if (const auto* c = std::get_if<CustomCoupling>(&h)) return c->l_h;
  return std::nullopt;
}

bool coupling_is_indicator_point(const CouplingFunction& h) {
  return std::holds_alternative<IndicatorPoint>(h);
}

VectorXd conj_prox(const CouplingFunction& h, double alpha, const VectorXd& x) {
  if (!(alpha > 0.0)) throw std::invalid_argument("conj_prox: alpha must be > 0");
  if (const auto* pt = std::get_if<IndicatorPoint>(&h)) {
    return x - alpha * pt->b;
  }
  if (const auto* ball = std::get_if<IndicatorBall>(&h)) {
    // Moreau decomposition: prox_{alpha h*}(x) = x - alpha * proj(x / alpha)
    return x - alpha * project_ball(x / alpha, ball->center, ball->radius);
  }
  if (const auto* quad = std::get_if<SmoothQuadratic>(&h)) {
    // h*(lambda) = lambda^T target + ||lambda||^2 / (4 w)
    return (x - alpha * quad->target) / (1.0 + alpha / (2.0 * quad->weight));
  }
  const auto& custom = std::get<CustomCoupling>(h);
  if (!custom.conj_prox) throw std::invalid_argument("conj_prox: custom coupling lacks an oracle");
  return custom.conj_prox(alpha, x);
}

VectorXd primal_prox(const CouplingFunction& h, double t, const VectorXd& z) {
  if (!(t > 0.0)) throw std::invalid_argument("primal_prox: step must be > 0");
  if (const auto* pt = std::get_if<IndicatorPoint>(&h)) {
    (void)z;
    return pt->b;
  }
  if (const auto* ball = std::get_if<IndicatorBall>(&h)) return project_ball(z, ball->center, ball->radius);
  if (const auto* quad = std::get_if<SmoothQuadratic>(&h)) {
    const double w = quad->weight;
    return (2.0 * w * t * quad->target + z) / (2.0 * w * t + 1.0);
  }
  throw std::invalid_argument("primal_prox: not available for custom couplings");
}

VectorXd soft_threshold(double alpha, const VectorXd& x) {
  if (alpha < 0.0) throw std::invalid_argument("soft_threshold: alpha must be >= 0");
  VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x(i);
    out(i) = v > alpha ? v - alpha : (v < -alpha ? v + alpha : 0.0);
  }
  return out;
}

VectorXd Problem::grad_f(const VectorXd& x) const {
  if (x.size() != d_total) throw std::invalid_argument("grad_f: dimension mismatch");
  VectorXd out(d_total);
  for (int i = 0; i < n_agents(); ++i)
    out.segment(offsets[i], agents[i].dim) = agents[i].f_grad(x.segment(offsets[i], agents[i].dim));
  return out;
}

double Problem::f_value(const VectorXd& x) const {
  double total = 0.0;
  for (int i = 0; i < n_agents(); ++i) {
    if (!agents[i].f_value) throw std::runtime_error("f_value oracle missing for agent " + std::to_string(i));
    total += agents[i].f_value(x.segment(offsets[i], agents[i].dim));
  }
  return total;
}

VectorXd Problem::prox_g(double stepsize, const VectorXd& x) const {
  if (x.size() != d_total) throw std::invalid_argument("prox_g: dimension mismatch");
  VectorXd out(d_total);
  for (int i = 0; i < n_agents(); ++i) {
    const auto seg = x.segment(offsets[i], agents[i].dim);
    out.segment(offsets[i], agents[i].dim) = agents[i].g_prox ? agents[i].g_prox(stepsize, seg) : seg;
  }
  return out;
}

bool Problem::has_g() const {
  for (const auto& a : agents)
    if (a.g_prox) return true;
  return false;
}

VectorXd Problem::apply_a_block(const VectorXd& x) const {
  if (x.size() != d_total) throw std::invalid_argument("apply_a_block: dimension mismatch");
  VectorXd out(static_cast<Eigen::Index>(n_agents()) * p);
  for (int i = 0; i < n_agents(); ++i)
    out.segment(static_cast<Eigen::Index>(i) * p, p) =
        agents[i].a * x.segment(offsets[i], agents[i].dim);
  return out;
}

VectorXd Problem::apply_at_block(const VectorXd& lambda) const {
  if (lambda.size() != static_cast<Eigen::Index>(n_agents()) * p)
    throw std::invalid_argument("apply_at_block: dimension mismatch");
  VectorXd out(d_total);
  for (int i = 0; i < n_agents(); ++i)
    out.segment(offsets[i], agents[i].dim) =
        agents[i].a.transpose() * lambda.segment(static_cast<Eigen::Index>(i) * p, p);
  return out;
}

VectorXd Problem::conj_prox_blockwise(double alpha, const VectorXd& v) const {
  if (v.size() != static_cast<Eigen::Index>(n_agents()) * p)
    throw std::invalid_argument("conj_prox_blockwise: dimension mismatch");
  VectorXd out(v.size());
  for (int i = 0; i < n_agents(); ++i)
    out.segment(static_cast<Eigen::Index>(i) * p, p) =
        conj_prox(h, alpha, v.segment(static_cast<Eigen::Index>(i) * p, p));
  return out;
}

std::uint64_t Problem::structure_hash() const {
  std::uint64_t hash = 1469598103934665603ULL;
  auto mix = [&hash](std::uint64_t v) {
    hash ^= v;
    hash *= 1099511628211ULL;
  };
  auto mix_double = [&mix](double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    mix(bits);
  };
  mix(static_cast<std::uint64_t>(p));
  mix(static_cast<std::uint64_t>(n_agents()));
  for (const auto& agent : agents) {
    mix(static_cast<std::uint64_t>(agent.dim));
    mix_double(agent.mu);
    mix_double(agent.l);
    for (Eigen::Index j = 0; j < agent.a.size(); ++j) mix_double(agent.a.data()[j]);
  }
  mix(static_cast<std::uint64_t>(h.index()));
  return hash;
}

Problem finalize_problem(std::vector<AgentSpec> agents, CouplingFunction h, int p) {
  if (agents.empty()) throw std::invalid_argument("problem needs at least one agent");
  Problem prob;
  prob.agents = std::move(agents);
  prob.h = std::move(h);
  prob.p = p;
  prob.offsets.resize(prob.agents.size());
  int d = 0;
  prob.mu = std::numeric_limits<double>::infinity();
  prob.l = 0.0;
  prob.sigma_max_a_block = 0.0;
  for (size_t i = 0; i < prob.agents.size(); ++i) {
    const auto& agent = prob.agents[i];
    if (agent.dim <= 0) throw std::invalid_argument("agent dimension must be positive");
    if (agent.a.rows() != p || agent.a.cols() != agent.dim)
      throw std::invalid_argument("agent coupling block has wrong shape");
    if (agent.mu > agent.l) throw std::invalid_argument("agent mu exceeds l");
    prob.offsets[i] = d;
    d += agent.dim;
    prob.mu = std::min(prob.mu, agent.mu);
    prob.l = std::max(prob.l, agent.l);
    const double sigma = agent.a.jacobiSvd().singularValues()(0);
    prob.sigma_max_a_block = std::max(prob.sigma_max_a_block, sigma);
  }
  prob.d_total = d;
  prob.a_full.resize(p, d);
  for (size_t i = 0; i < prob.agents.size(); ++i)
    prob.a_full.middleCols(prob.offsets[i], prob.agents[i].dim) = prob.agents[i].a;
  prob.sigma_max_a_full = prob.a_full.jacobiSvd().singularValues()(0);
  return prob;
}

namespace {

void check_partition(const std::vector<int>& partition, Eigen::Index d) {
  const long long total = std::accumulate(partition.begin(), partition.end(), 0LL);
  if (partition.empty() || total != static_cast<long long>(d))
    throw std::invalid_argument("partition does not sum to the feature dimension");
  for (int w : partition)
    if (w <= 0) throw std::invalid_argument("partition entries must be positive");
}

AgentSpec quadratic_agent(int dim, double coeff, const MatrixXd& a) {
  AgentSpec agent;
  agent.dim = dim;
  agent.mu = coeff;
  agent.l = coeff;
  agent.f_grad = [coeff](const VectorXd& v) { return VectorXd(coeff * v); };
  agent.f_value = [coeff](const VectorXd& v) { return 0.5 * coeff * v.squaredNorm(); };
  agent.a = a;
  return agent;
}

}  // namespace

Problem build_ridge_problem(const MatrixXd& x_data, const VectorXd& y_data,
                            const std::vector<int>& partition, double radius) {
  check_partition(partition, x_data.cols());
  if (y_data.size() != x_data.rows()) throw std::invalid_argument("X and Y row counts differ");
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be > 0");
  const auto svd = x_data.jacobiSvd();
  const double smallest = svd.singularValues()(svd.singularValues().size() - 1);
  if (smallest <= 1e-10 * svd.singularValues()(0)) {
    std::ostringstream msg;
    msg << "ridge problem requires full row rank X (smallest singular value " << smallest << ")";
    throw std::invalid_argument(msg.str());
  }

  std::vector<AgentSpec> agents;
  int col = 0;
  for (int width : partition) {
    agents.push_back(quadratic_agent(width, 1.0, x_data.middleCols(col, width)));
    col += width;
  }
  IndicatorBall ball{y_data, radius};
  return finalize_problem(std::move(agents), ball, static_cast<int>(x_data.rows()));
}

Problem build_logistic_problem(const MatrixXd& x_data, const VectorXd& labels,
                               const std::vector<int>& partition, double rho, double eps_reg) {
  check_partition(partition, x_data.cols());
  const int p = static_cast<int>(x_data.rows());
  if (labels.size() != p) throw std::invalid_argument("X and label row counts differ");
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    if (labels(i) != 1.0 && labels(i) != -1.0)
      throw std::invalid_argument("labels must be +1 or -1");
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be > 0");
  if (eps_reg < 0.0) throw std::invalid_argument("eps_reg must be >= 0");

  std::vector<AgentSpec> agents;
  int col = 0;
  for (int width : partition) {
    agents.push_back(quadratic_agent(width, rho, x_data.middleCols(col, width)));
    col += width;
  }

  // Slack agent: f(z) = (1/p) sum ln(1 + exp(-y_j z_j)) + (eps/2)||z||^2,
  // coupled through A = -I_p.
  AgentSpec slack;
  slack.dim = p;
  slack.mu = eps_reg;
  slack.l = 1.0 / (4.0 * static_cast<double>(p)) + eps_reg;
  const VectorXd y = labels;
  const double inv_p = 1.0 / static_cast<double>(p);
  slack.f_grad = [y, inv_p, eps_reg](const VectorXd& z) {
    VectorXd g(z.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      const double margin = -y(j) * z(j);
      g(j) = -y(j) * inv_p / (1.0 + std::exp(-margin)) + eps_reg * z(j);
    }
    return g;
  };
  slack.f_value = [y, inv_p, eps_reg](const VectorXd& z) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      const double margin = -y(j) * z(j);
      // log(1 + exp(m)) computed stably
      total += inv_p * (margin > 0.0 ? margin + std::log1p(std::exp(-margin))
                                     : std::log1p(std::exp(margin)));
    }
    return total + 0.5 * eps_reg * z.squaredNorm();
  };
  slack.a = -MatrixXd::Identity(p, p);
  agents.push_back(std::move(slack));

  IndicatorPoint origin{VectorXd::Zero(p)};
  return finalize_problem(std::move(agents), origin, p);
}

Problem build_elastic_net_problem(const MatrixXd& x_data, const VectorXd& y_data,
                                  const std::vector<int>& partition, double alpha_reg,
                                  double rho) {
  check_partition(partition, x_data.cols());
  if (y_data.size() != x_data.rows()) throw std::invalid_argument("X and Y row counts differ");
  if (!(alpha_reg > 0.0)) throw std::invalid_argument("alpha_reg must be > 0");
  if (rho < 0.0 || rho >= 1.0)
    throw std::invalid_argument("rho must lie in [0, 1): rho = 1 loses strong convexity");

  const double quad_coeff = alpha_reg * (1.0 - rho);
  const double l1_coeff = alpha_reg * rho;
  std::vector<AgentSpec> agents;
  int col = 0;
  for (int width : partition) {
    AgentSpec agent = quadratic_agent(width, quad_coeff, x_data.middleCols(col, width));
    if (l1_coeff > 0.0)
      agent.g_prox = [l1_coeff](double step, const VectorXd& v) {
        return soft_threshold(step * l1_coeff, v);
      };
    agents.push_back(std::move(agent));
    col += width;
  }
  const int p = static_cast<int>(x_data.rows());
  SmoothQuadratic fit{y_data, 1.0 / (2.0 * static_cast<double>(p))};
  return finalize_problem(std::move(agents), fit, p);
}

Dataset parse_csv_dataset(const std::string& text, bool standardize, bool add_intercept) {
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      size_t used = 0;
      double value;
      try {
        value = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw std::invalid_argument("csv: non-numeric cell '" + cell + "'");
      }
      if (cell.find_first_not_of(" \t\r", used) != std::string::npos)
        throw std::invalid_argument("csv: non-numeric cell '" + cell + "'");
      row.push_back(value);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::invalid_argument("csv: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("csv: empty dataset");
  if (rows.front().size() < 2) throw std::invalid_argument("csv: need at least one feature and a label");

  const int p = static_cast<int>(rows.size());
  const int d = static_cast<int>(rows.front().size()) - 1;
  Dataset data;
  data.x.resize(p, d);
  data.y.resize(p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < d; ++j) data.x(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    data.y(i) = rows[static_cast<size_t>(i)][static_cast<size_t>(d)];
  }

  if (standardize) {
    // population convention: divide by sqrt(sum (x - mean)^2 / p)
    for (int j = 0; j < d; ++j) {
      const double mean = data.x.col(j).mean();
      data.x.col(j).array() -= mean;
      const double std_dev = std::sqrt(data.x.col(j).squaredNorm() / static_cast<double>(p));
      if (std_dev > 1e-300) data.x.col(j) /= std_dev;
    }
  }
  if (add_intercept) {
    data.x.conservativeResize(Eigen::NoChange, d + 1);
    data.x.col(d).setOnes();
  }
  return data;
}

Dataset load_csv_dataset(const std::string& path, bool standardize, bool add_intercept) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv_dataset(ss.str(), standardize, add_intercept);
}

Dataset synthesize_dataset(int p, int d, double cond, std::uint64_t seed, bool full_row_rank) {
  if (p < 1 || d < 1) throw std::invalid_argument("synthesize_dataset: dimensions must be positive");
  if (full_row_rank && p > d)
    throw std::invalid_argument("synthesize_dataset: full-row-rank mode needs p <= d");
  if (!(cond >= 1.0)) throw std::invalid_argument("synthesize_dataset: cond must be >= 1");

  Rng rng(seed);
  const int k = std::min(p, d);
  const MatrixXd gu = rng.gaussian_matrix(p, p);
  const MatrixXd gv = rng.gaussian_matrix(d, d);
  const MatrixXd u = Eigen::HouseholderQR<MatrixXd>(gu).householderQ() * MatrixXd::Identity(p, k);
  const MatrixXd v = Eigen::HouseholderQR<MatrixXd>(gv).householderQ() * MatrixXd::Identity(d, k);

  VectorXd sigma(k);
  for (int i = 0; i < k; ++i)
    sigma(i) = k == 1 ? 1.0 : std::pow(cond, -static_cast<double>(i) / static_cast<double>(k - 1));

  Dataset data;
  data.x = u * sigma.asDiagonal() * v.transpose();
  const VectorXd theta_true = rng.gaussian_vector(d);
  data.y = data.x * theta_true + 0.01 * rng.gaussian_vector(p);
  return data;
}

}  // namespace npga
