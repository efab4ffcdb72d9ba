#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "npga/oracle.hpp"
#include "npga/solver.hpp"
#include "test_support.hpp"

using namespace npga;
using namespace npga::testing;

namespace {

MixingMatrix mixing_for(int n, std::uint64_t seed) {
  return mixing_matrix_laplacian(erdos_renyi_connected(n, 0.5, seed), 1.0);
}

StepSizes small_steps(const Problem& prob, double theta = 0.5) {
  StepSizes s;
  s.alpha = 0.2 / prob.l;
  s.beta = 0.05;
  s.gamma = 0.5;
  s.theta = theta;
  return s;
}

NetworkScheme single_node_scheme() {
  NetworkScheme s;
  s.name = "single";
  s.b2 = MatrixXd::Zero(1, 1);
  s.c = MatrixXd::Zero(1, 1);
  s.d = MatrixXd::Ones(1, 1);
  s.b = MatrixXd::Zero(1, 1);
  s.comm_rounds = 0;
  return s;
}

}  // namespace

TEST_CASE("init_state") {
  const Problem prob = make_random_ridge(5, 6, 10, 1);
  const NetworkScheme scheme = make_table_scheme("NPGA-EXTRA", mixing_for(5, 2));
  const SolverState state = init_state(prob, scheme);
  CHECK(state.k == 0);
  CHECK(state.y.cwiseAbs().maxCoeff() == 0.0);
  CHECK(state.x_hat == state.x);
  CHECK(state.v == state.lambda);

  CHECK_THROWS_AS(init_state(prob, scheme, VectorXd::Zero(3), VectorXd::Zero(30)),
                  std::invalid_argument);

  // identical blocks: consensus error is zero
  Rng rng(3);
  const VectorXd block = rng.gaussian_vector(prob.p);
  VectorXd stacked(5 * prob.p);
  for (int i = 0; i < 5; ++i) stacked.segment(i * prob.p, prob.p) = block;
  const SolverState shifted = init_state(prob, scheme, VectorXd::Zero(prob.d_total), stacked);
  CHECK(consensus_error(shifted.lambda, 5, prob.p) < 1e-14);
}

TEST_CASE("theta = 0 means no extrapolation") {
  const Problem prob = make_random_ridge(4, 5, 8, 7);
  const NetworkScheme scheme = make_table_scheme("NPGA-EXTRA", mixing_for(4, 5));
  StepSizes steps = small_steps(prob, 0.0);
  SolverState state = init_state(prob, scheme);
  state = step_four_sequence(state, prob, scheme, steps);
  CHECK((state.x_hat - state.x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("consensus error examples") {
  VectorXd two(2);
  two << 1.0, -1.0;
  CHECK(consensus_error(two, 2, 1) == doctest::Approx(std::sqrt(2.0)));
  CHECK(consensus_error(3.0 * two, 2, 1) == doctest::Approx(3.0 * std::sqrt(2.0)));
  VectorXd same(4);
  same << 2.0, 2.0, 2.0, 2.0;
  CHECK(consensus_error(same, 2, 2) == 0.0);
}

TEST_CASE("n = 1 degenerates to the centralized primal-dual iteration") {
  // single agent, smooth quadratic coupling
  const Dataset data = synthesize_dataset(2, 3, 4.0, 11);
  const Problem prob = build_elastic_net_problem(data.x, data.y, {3}, 1.0, 0.4);
  const NetworkScheme scheme = single_node_scheme();

  StepSizes steps;
  steps.alpha = 0.3;
  steps.beta = 0.7;
  steps.gamma = 0.9;
  steps.theta = 1.0;

  SolverState state = init_state(prob, scheme);
  // independent transcription of the centralized update
  VectorXd x = VectorXd::Zero(prob.d_total);
  VectorXd lambda = VectorXd::Zero(prob.p);
  for (int k = 0; k < 25; ++k) {
    state = step_four_sequence(state, prob, scheme, steps);
    const VectorXd x_next =
        prob.prox_g(steps.alpha,
                    x - steps.alpha * (prob.grad_f(x) + prob.a_full.transpose() * lambda));
    lambda = conj_prox(prob.h, steps.beta,
                       lambda + steps.beta * (prob.a_full * (x_next + steps.theta * (x_next - x))));
    x = x_next;
    CAPTURE(k);
    REQUIRE((state.x - x).norm() < 1e-12);
    REQUIRE((state.lambda - lambda).norm() < 1e-12);
  }
}

TEST_CASE("engines agree from the zero start") {
  const Problem prob = make_random_ridge(6, 5, 12, 21);
  const MixingMatrix mix = mixing_for(6, 22);
  for (const auto& name : {"NPGA-EXTRA", "NPGA-II", "NPGA-Exact-diffusion"}) {
    const NetworkScheme scheme = make_table_scheme(name, mix);
    const StepSizes steps = small_steps(prob);
    SolverState a = init_state(prob, scheme);
    SolverState b = a;
    for (int k = 0; k < 60; ++k) {
      a = step_four_sequence(a, prob, scheme, steps);
      b = step_rewritten(b, prob, scheme, steps);
    }
    CAPTURE(name);
    CHECK((a.x - b.x).norm() < 1e-9);
    CHECK((a.lambda - b.lambda).norm() < 1e-9);
  }
}

TEST_CASE("y stays in col(B) when started at zero") {
  const Problem prob = make_random_ridge(5, 4, 10, 31);
  const MixingMatrix mix = mixing_for(5, 32);
  const NetworkScheme scheme = make_table_scheme("NPGA-P2D2", mix);
  const StepSizes steps = small_steps(prob);

  // projector onto the null block of B per p-block
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(scheme.b2);
  const MatrixXd q = es.eigenvectors();
  SolverState state = init_state(prob, scheme);
  for (int k = 0; k < 40; ++k) {
    state = step_four_sequence(state, prob, scheme, steps);
    Eigen::Map<const MatrixXd> blocks(state.y.data(), prob.p, 5);
    const MatrixXd in_eigenbasis = blocks * q;
    double outside = 0.0;
    for (int i = 0; i < 5; ++i)
      if (es.eigenvalues()(i) <= 1e-12) outside += in_eigenbasis.col(i).squaredNorm();
    REQUIRE(std::sqrt(outside) < 1e-9 * std::max(1.0, state.y.norm()));
  }
}

TEST_CASE("extra needs one exchanged message per neighbor") {
  // v+ must be computable from lambda_i - lambda_i_prev + gamma v_i alone
  const Problem prob = make_random_ridge(5, 4, 10, 41);
  const MixingMatrix mix = mixing_for(5, 42);
  const NetworkScheme scheme = build_scheme("NPGA-EXTRA", mix);
  const StepSizes steps = small_steps(prob, 0.3);

  SolverState state = init_state(prob, scheme);
  for (int k = 0; k < 3; ++k) state = step_rewritten(state, prob, scheme, steps);

  const SolverState next = step_rewritten(state, prob, scheme, steps);
  const int p = prob.p;
  const VectorXd ax = prob.apply_a_block(next.x_hat - state.x_hat);
  for (int i = 0; i < 5; ++i) {
    VectorXd v_i = 0.5 * (state.lambda.segment(i * p, p) - state.lambda_prev.segment(i * p, p));
    v_i += (1.0 - 0.5 * steps.gamma) * state.v.segment(i * p, p);
    for (int j = 0; j < 5; ++j) {
      if (mix.w(i, j) == 0.0) continue;
      const VectorXd message = state.lambda.segment(j * p, p) - state.lambda_prev.segment(j * p, p) +
                               steps.gamma * state.v.segment(j * p, p);
      v_i += 0.5 * mix.w(i, j) * message;
    }
    v_i += steps.beta * ax.segment(i * p, p);
    CHECK((v_i - next.v.segment(i * p, p)).norm() < 1e-12);
  }
}

TEST_CASE("run: zero iterations gives a single row with gap one") {
  const Problem prob = make_random_ridge(4, 5, 8, 51);
  const NetworkScheme scheme = make_table_scheme("NPGA-EXTRA", mixing_for(4, 52));
  RunOptions options;
  options.max_iters = 0;
  Rng rng(53);
  options.x_star = rng.gaussian_vector(prob.d_total);
  const Trace trace = run(prob, scheme, small_steps(prob), options);
  REQUIRE(trace.rows.size() == 1);
  CHECK(trace.rows[0].gap == doctest::Approx(1.0));
  CHECK(trace.rows[0].comm_rounds == 0);
}

TEST_CASE("run: divergence detector stops cleanly") {
  const Problem prob = make_random_ridge(4, 5, 8, 61);
  const NetworkScheme scheme = make_table_scheme("NPGA-EXTRA", mixing_for(4, 62));
  StepSizes wild;
  wild.alpha = 1e3;
  wild.beta = 1e3;
  wild.gamma = 0.9;
  wild.theta = 1.0;
  RunOptions options;
  options.max_iters = 4000;
  const OracleSolution sol = solve_reference(prob, 1e-10, 200000);
  options.x_star = sol.x_star;
  const Trace trace = run(prob, scheme, wild, options);
  CHECK(trace.diverged);
  CHECK(trace.rows.size() < 4001);
  CHECK_FALSE(trace.stop_reason.empty());
}

TEST_CASE("run: comm rounds accumulate at the scheme rate") {
  const Problem prob = make_random_ridge(4, 5, 8, 71);
  const NetworkScheme two_rounds = make_table_scheme("NPGA-II", mixing_for(4, 72));
  RunOptions options;
  options.max_iters = 5;
  const Trace trace = run(prob, two_rounds, small_steps(prob), options);
  REQUIRE(trace.rows.size() == 6);
  CHECK(trace.rows[5].comm_rounds == 10);
  CHECK(trace.rows[5].iter == 5);
}

TEST_CASE("dcpa and dcda transcriptions match the engines") {
  const Problem prob = make_random_ridge(5, 4, 10, 81);
  const MixingMatrix mix = mixing_for(5, 82);

  StepSizes dcpa_steps;
  dcpa_steps.alpha = 0.2 / prob.l;
  dcpa_steps.beta = 0.05;
  dcpa_steps.gamma = 0.45;
  dcpa_steps.theta = 1.0;
  const NetworkScheme p2d2 = build_scheme("NPGA-P2D2", mix, 1.0);
  SolverState engine_state = init_state(prob, p2d2);
  SolverState oracle_state = engine_state;
  for (int k = 0; k < 50; ++k) {
    engine_state = step_rewritten(engine_state, prob, p2d2, dcpa_steps);
    oracle_state = dcpa_step(oracle_state, prob, mix.w, dcpa_steps);
    CAPTURE(k);
    REQUIRE((engine_state.x - oracle_state.x).norm() < 1e-11);
    REQUIRE((engine_state.lambda - oracle_state.lambda).norm() < 1e-11);
    REQUIRE((engine_state.v - oracle_state.v).norm() < 1e-11);
  }

  StepSizes dcda_steps;
  dcda_steps.alpha = 0.2 / prob.l;
  dcda_steps.beta = 0.05;
  dcda_steps.gamma = 1.0;  // pinned by the algorithm
  dcda_steps.theta = 0.0;
  const NetworkScheme diffusion = build_scheme("NPGA-Exact-diffusion", mix);
  SolverState engine_d = init_state(prob, diffusion);
  SolverState oracle_d = engine_d;
  for (int k = 0; k < 50; ++k) {
    engine_d = step_rewritten(engine_d, prob, diffusion, dcda_steps);
    oracle_d = dcda_step(oracle_d, prob, mix.w, dcda_steps);
    CAPTURE(k);
    REQUIRE((engine_d.x - oracle_d.x).norm() < 1e-11);
    REQUIRE((engine_d.lambda - oracle_d.lambda).norm() < 1e-11);
  }
}
