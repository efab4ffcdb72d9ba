#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "npga/oracle.hpp"
#include "npga/theory.hpp"
#include "test_support.hpp"

using namespace npga;
using namespace npga::testing;

namespace {

// two agents, f_i = (coeff/2)||x||^2, A_i = [1], point-indicator coupling
Problem two_agent_scalar_problem(double coeff) {
  std::vector<AgentSpec> agents;
  for (int i = 0; i < 2; ++i) {
    AgentSpec a;
    a.dim = 1;
    a.mu = coeff;
    a.l = coeff;
    a.f_grad = [coeff](const VectorXd& v) { return VectorXd(coeff * v); };
    a.f_value = [coeff](const VectorXd& v) { return 0.5 * coeff * v.squaredNorm(); };
    a.a = MatrixXd::Identity(1, 1);
    agents.push_back(std::move(a));
  }
  VectorXd b(1);
  b << 1.0;
  return finalize_problem(std::move(agents), IndicatorPoint{b}, 1);
}

MixingMatrix two_node_mixing() {
  Graph g;
  g.n = 2;
  g.edges = {{0, 1}};
  return mixing_matrix_laplacian(g, 1.0);
}

}  // namespace

TEST_CASE("spectral quantities") {
  const Problem prob = two_agent_scalar_problem(1.0);
  const MixingMatrix mix = two_node_mixing();
  const NetworkScheme extra = build_scheme("NPGA-EXTRA", mix);
  const SpectralQuantities q = spectral_quantities(extra, prob);
  // B^2 = (I - W)/2 has eigenvalues {0, 1/2}
  CHECK(q.sigma_max_b == doctest::Approx(std::sqrt(0.5)));
  CHECK(q.sigma_min_nz_b == doctest::Approx(std::sqrt(0.5)));
  CHECK(q.sigma_max_c == doctest::Approx(0.5));
  CHECK(q.sigma_max_a_block == doctest::Approx(1.0));

  const NetworkScheme nids = build_scheme("NPGA-NIDS", mix, 0.4);
  CHECK(spectral_quantities(nids, prob).sigma_max_c == 0.0);

  NetworkScheme degenerate = extra;
  degenerate.b2.setZero();
  CHECK_THROWS_AS(spectral_quantities(degenerate, prob), std::invalid_argument);
}

TEST_CASE("step bound formulas") {
  const MixingMatrix mix = two_node_mixing();

  {
    // l = 1, theta = 0: alpha bound is 1 (open); sigma_max C = 1/2 gives
    // beta bound mu / (1 / (1 - 1/2)) = 1/2
    const Problem prob = two_agent_scalar_problem(1.0);
    const NetworkScheme extra = build_scheme("NPGA-EXTRA", mix);
    const RateCertificate bounds = step_bounds(RateCase::Case1, prob, extra, 0.0);
    CHECK(bounds.alpha_max.value == doctest::Approx(1.0));
    CHECK(bounds.alpha_max.open);
    CHECK(bounds.beta_max.value == doctest::Approx(0.5));
    CHECK_FALSE(bounds.beta_max.open);
    CHECK(bounds.gamma_depends_on_alpha_beta);
  }
  {
    // l = 2, theta = 1: alpha bound 1 / (l (1 + 2 theta)) = 1/6
    const Problem prob = two_agent_scalar_problem(2.0);
    const NetworkScheme extra = build_scheme("NPGA-EXTRA", mix);
    const RateCertificate bounds = step_bounds(RateCase::Case1, prob, extra, 1.0);
    CHECK(bounds.alpha_max.value == doctest::Approx(1.0 / 6.0));
  }
  {
    // Indicator: alpha < 1/l, beta <= mu (1 - sigma_max C) / sigma_max^2 A
    const Problem prob = two_agent_scalar_problem(2.0);
    const NetworkScheme extra = build_scheme("NPGA-EXTRA", mix);
    const RateCertificate bounds = step_bounds(RateCase::Indicator, prob, extra, 0.0);
    CHECK(bounds.alpha_max.value == doctest::Approx(0.5));
    CHECK(bounds.beta_max.value == doctest::Approx(2.0 * 0.5));
    CHECK(bounds.gamma_max.value == doctest::Approx(1.0));
    CHECK_THROWS_AS(step_bounds(RateCase::Indicator, prob, extra, 0.5), assumption_error);
  }
}

TEST_CASE("theta monotonicity: larger theta shrinks the box") {
  const Problem prob = make_random_ridge(5, 4, 10, 3);
  const MixingMatrix mix = mixing_matrix_laplacian(erdos_renyi_connected(5, 0.6, 4), 1.0);
  const NetworkScheme scheme = build_scheme("NPGA-P2D2", mix, 1.0);
  double prev_alpha = std::numeric_limits<double>::infinity();
  double prev_beta = std::numeric_limits<double>::infinity();
  for (double theta : {0.0, 0.5, 1.0}) {
    const RateCertificate bounds = step_bounds(RateCase::Case1, prob, scheme, theta);
    CHECK(bounds.alpha_max.value < prev_alpha);
    CHECK(bounds.beta_max.value < prev_beta);
    prev_alpha = bounds.alpha_max.value;
    prev_beta = bounds.beta_max.value;
  }
}

TEST_CASE("case assumption gates name the culprit") {
  const Problem ridge = make_random_ridge(5, 4, 10, 5);
  const MixingMatrix mix = mixing_matrix_laplacian(erdos_renyi_connected(5, 0.6, 6), 1.0);

  // C = 0 cannot satisfy Assumption 6
  const NetworkScheme nids = build_scheme("NPGA-NIDS", mix, 0.4);
  CHECK_THROWS_WITH_AS(step_bounds(RateCase::Case1, ridge, nids, 0.0),
                       doctest::Contains("Assumption 6"), assumption_error);

  // D = I cannot satisfy Assumption 7
  const NetworkScheme extra = build_scheme("NPGA-EXTRA", mix);
  CHECK_THROWS_WITH_AS(step_bounds(RateCase::Case1ATC, ridge, extra, 0.0),
                       doctest::Contains("Assumption 7"), assumption_error);

  // ball coupling is not a point indicator
  CHECK_THROWS_WITH_AS(step_bounds(RateCase::Indicator, ridge, extra, 0.0),
                       doctest::Contains("point indicator"), assumption_error);

  // ridge coupling has no smoothness modulus
  CHECK_THROWS_WITH_AS(step_bounds(RateCase::Smooth, ridge, extra, 0.0),
                       doctest::Contains("l_h"), assumption_error);

  // g != 0 is rejected for Case1
  const Problem elastic = make_random_elastic(5, 4, 10, 7);
  CHECK_THROWS_WITH_AS(step_bounds(RateCase::Case1, elastic, extra, 0.0),
                       doctest::Contains("g = 0"), assumption_error);
}

TEST_CASE("E and F matrices") {
  const Problem prob = two_agent_scalar_problem(1.0);
  const MixingMatrix mix = two_node_mixing();
  const NetworkScheme extra = build_scheme("NPGA-EXTRA", mix);

  const double alpha = 0.5, beta = 0.25;
  const LiftedMatrix e = build_e_matrix(prob, extra.c, alpha, beta);
  // E = I_2 + C / (2 alpha beta) with C = [[.25, -.25], [-.25, .25]]
  MatrixXd expect = MatrixXd::Identity(2, 2);
  expect += extra.c / (2.0 * alpha * beta);
  CHECK((e.m - expect).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(e.positive_definite);
  CHECK(e.eta_min == doctest::Approx(sym_eigenvalues(expect)(0)));

  // Weyl: eta_min(E) <= sigma_max^2(A)
  CHECK(e.eta_min <= 1.0 + 1e-12);

  const LiftedMatrix f = build_f_matrix(prob, extra, alpha, beta, 0.9);
  CHECK(f.positive_definite);
  CHECK(f.eta_min <= 1.0 + 1e-12);
  CHECK_THROWS_AS(build_f_matrix(prob, extra, alpha, beta, 1.0), std::invalid_argument);

  // gamma -> 1 limit: F approaches D A A^T D
  const LiftedMatrix f_near = build_f_matrix(prob, extra, alpha, beta, 1.0 - 1e-9);
  const MatrixXd daat = kron_identity(extra.d, 1) *
                        MatrixXd(MatrixXd::Identity(2, 2)) * kron_identity(extra.d, 1);
  CHECK((f_near.m - daat).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("weyl bounds on random instances") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Problem prob = make_random_ridge(4 + static_cast<int>(seed % 3), 4, 9, seed);
    const MixingMatrix mix = mixing_matrix_laplacian(
        erdos_renyi_connected(prob.n_agents(), 0.6, seed + 100), 1.0);
    const NetworkScheme scheme = build_scheme("NPGA-P2D2", mix, 1.0);
    const double sa2 = prob.sigma_max_a_block * prob.sigma_max_a_block;
    const LiftedMatrix e = build_e_matrix(prob, scheme.c, 0.2, 0.1);
    CHECK(e.eta_min <= sa2 + 1e-10);
    const LiftedMatrix f = build_f_matrix(prob, scheme, 0.2, 0.1, 0.5);
    CHECK(f.eta_min <= sa2 + 1e-10);
  }
}

TEST_CASE("certificate constants recompute from raw quantities") {
  const Problem prob = make_random_ridge(5, 4, 10, 9);
  const MixingMatrix mix = mixing_matrix_laplacian(erdos_renyi_connected(5, 0.6, 10), 1.0);
  const NetworkScheme scheme = build_scheme("NPGA-P2D2", mix, 1.0);

  const StepSizes steps = suggest_steps(RateCase::Case1, prob, scheme, 1.0, 0.9);
  const RateCertificate cert = rate_certificate(RateCase::Case1, prob, scheme, steps);

  // independent recomputation
  const VectorXd b2_eigs = sym_eigenvalues(scheme.b2);
  const double sb2 = b2_eigs(4);
  double sb_min2 = 0.0;
  for (int i = 0; i < 5; ++i)
    if (b2_eigs(i) > 1e-9 * sb2) {
      sb_min2 = b2_eigs(i);
      break;
    }
  const double sc = sym_eigenvalues(scheme.c)(4);
  double sa = 0.0;
  for (const auto& agent : prob.agents)
    sa = std::max(sa, agent.a.jacobiSvd().singularValues()(0));

  const double delta1 =
      1.0 - steps.alpha * prob.mu * (1.0 - steps.alpha * prob.l * (1.0 + 2.0 * steps.theta));
  MatrixXd e_direct = kron_identity(scheme.c, prob.p) / (2.0 * steps.alpha * steps.beta);
  for (int i = 0; i < prob.n_agents(); ++i)
    e_direct.block(i * prob.p, i * prob.p, prob.p, prob.p) +=
        prob.agents[i].a * prob.agents[i].a.transpose();
  const double eta_e = sym_eigenvalues(e_direct)(0);
  const double delta2 = 1.0 - steps.alpha * steps.beta * eta_e;
  const double delta3 = 1.0 - steps.gamma * sb_min2;
  const double omega = 1.0 - steps.gamma * sb2;

  CHECK(cert.delta1 == doctest::Approx(delta1).epsilon(1e-12));
  CHECK(cert.delta2 == doctest::Approx(delta2).epsilon(1e-10));
  CHECK(cert.delta3 == doctest::Approx(delta3).epsilon(1e-12));
  CHECK(cert.omega == doctest::Approx(omega).epsilon(1e-12));
  CHECK(cert.delta ==
        doctest::Approx(std::max({delta1, delta2 / omega, delta3})).epsilon(1e-10));
  CHECK(cert.c1 > 0.0);
  CHECK(cert.c2 == doctest::Approx(steps.alpha / steps.beta));
  CHECK(cert.c3 == doctest::Approx(steps.alpha / (steps.beta * steps.gamma)));
  CHECK(cert.spectral.sigma_max_c == doctest::Approx(sc));
  CHECK(cert.spectral.sigma_max_a_block == doctest::Approx(sa));
  CHECK(cert.delta >= cert.delta1);
  CHECK(cert.delta >= cert.delta3);
  CHECK(cert.delta > 0.0);
  CHECK(cert.delta < 1.0);
}

TEST_CASE("atc certificate is at least as tight at matched steps") {
  const Problem prob = make_random_ridge(6, 4, 12, 11);
  const MixingMatrix mix = mixing_matrix_laplacian(erdos_renyi_connected(6, 0.5, 12), 1.0);
  const NetworkScheme scheme = build_scheme("NPGA-II", mix, 1.0, std::nullopt, true);

  const StepSizes steps = suggest_steps(RateCase::Case1, prob, scheme, 1.0, 0.9);
  const RateCertificate thm1 = rate_certificate(RateCase::Case1, prob, scheme, steps);
  const RateCertificate thm2 = rate_certificate(RateCase::Case1ATC, prob, scheme, steps);
  CHECK(thm2.delta <= thm1.delta + 1e-15);
}

TEST_CASE("steps outside the box are refused with the violated inequality") {
  const Problem prob = make_random_ridge(5, 4, 10, 13);
  const MixingMatrix mix = mixing_matrix_laplacian(erdos_renyi_connected(5, 0.6, 14), 1.0);
  const NetworkScheme scheme = build_scheme("NPGA-P2D2", mix, 1.0);
  StepSizes steps = suggest_steps(RateCase::Case1, prob, scheme, 1.0, 0.9);
  steps.alpha = 10.0;
  CHECK_THROWS_WITH_AS(rate_certificate(RateCase::Case1, prob, scheme, steps),
                       doctest::Contains("alpha"), std::domain_error);
}

TEST_CASE("gamma to zero pushes delta3 toward one") {
  const Problem prob = make_random_ridge(5, 4, 10, 15);
  const MixingMatrix mix = mixing_matrix_laplacian(erdos_renyi_connected(5, 0.6, 16), 1.0);
  const NetworkScheme scheme = build_scheme("NPGA-II", mix, 1.0, std::nullopt, true);
  StepSizes steps = suggest_steps(RateCase::Case1ATC, prob, scheme, 1.0, 0.9);
  steps.gamma = 1e-8;
  const RateCertificate cert = rate_certificate(RateCase::Case1ATC, prob, scheme, steps);
  CHECK(cert.delta3 > 1.0 - 1e-7);
  CHECK(cert.delta3 < 1.0);
  CHECK(cert.delta >= cert.delta3);
}

TEST_CASE("lyapunov values") {
  const Problem prob = make_random_ridge(5, 4, 10, 17);
  const MixingMatrix mix = mixing_matrix_laplacian(erdos_renyi_connected(5, 0.6, 18), 1.0);
  const NetworkScheme scheme = build_scheme("NPGA-P2D2", mix, 1.0);
  const OracleSolution sol = solve_reference(prob);
  REQUIRE(sol.converged);

  const StepSizes steps = suggest_steps(RateCase::Case1, prob, scheme, 1.0, 0.9);
  const RateCertificate cert = rate_certificate(RateCase::Case1, prob, scheme, steps);
  const FixedPoint fp = construct_fixed_point(prob, scheme, steps.beta, sol.x_star, sol.lambda_star);

  const SolverState at_fp = fp.as_state(prob);
  CHECK(lyapunov_value(cert, at_fp, fp, prob, scheme) < 1e-18);

  Rng rng(19);
  SolverState bumped = at_fp;
  bumped.x += rng.gaussian_vector(prob.d_total);
  bumped.lambda += rng.gaussian_vector(5 * prob.p);
  bumped.y += rng.gaussian_vector(5 * prob.p);
  bumped.v += rng.gaussian_vector(5 * prob.p);
  const double v1 = lyapunov_value(cert, bumped, fp, prob, scheme);
  CHECK(v1 > 0.0);

  SolverState doubled = at_fp;
  doubled.x = at_fp.x + 2.0 * (bumped.x - at_fp.x);
  doubled.lambda = at_fp.lambda + 2.0 * (bumped.lambda - at_fp.lambda);
  doubled.y = at_fp.y + 2.0 * (bumped.y - at_fp.y);
  doubled.v = at_fp.v + 2.0 * (bumped.v - at_fp.v);
  CHECK(lyapunov_value(cert, doubled, fp, prob, scheme) == doctest::Approx(4.0 * v1));

  // Indicator weighting reduces to the plain norm as gamma -> 0
  const Problem lgst = make_random_logistic(4, 5, 8, 20, 0.5, 1e-2);
  const MixingMatrix mix5 = mixing_matrix_laplacian(erdos_renyi_connected(5, 0.6, 21), 1.0);
  const NetworkScheme nids = build_scheme("NPGA-NIDS", mix5, 0.4);
  StepSizes ind_steps = suggest_steps(RateCase::Indicator, lgst, nids, 0.0, 0.9);
  ind_steps.gamma = 1e-12;
  const RateCertificate ind_cert = rate_certificate(RateCase::Indicator, lgst, nids, ind_steps);
  const OracleSolution lsol = solve_reference(lgst);
  const FixedPoint lfp =
      construct_fixed_point(lgst, nids, ind_steps.beta, lsol.x_star, lsol.lambda_star);
  SolverState moved = lfp.as_state(lgst);
  Rng rng2(23);
  moved.v += rng2.gaussian_vector(5 * lgst.p);
  const double expect = ind_cert.c2 * (moved.v - lfp.v_stacked(5)).squaredNorm();
  CHECK(lyapunov_value(ind_cert, moved, lfp, lgst, nids) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("gap decay is R-linear with the certified rate") {
  // the proof's composite gives gap_k^2 <= (V_0 / weight_x) delta^k, where
  // weight_x is the x-coefficient of the case's lyapunov
  const Problem prob = make_random_ridge(5, 4, 10, 25);
  const MixingMatrix mix = mixing_matrix_laplacian(erdos_renyi_connected(5, 0.5, 26), 1.0);
  const NetworkScheme scheme = build_scheme("NPGA-P2D2", mix, 1.0);
  const StepSizes steps = suggest_steps(RateCase::Case1, prob, scheme, 1.0, 0.9);
  const RateCertificate cert = rate_certificate(RateCase::Case1, prob, scheme, steps);
  const OracleSolution sol = solve_reference(prob);
  REQUIRE(sol.converged);
  const FixedPoint fp = construct_fixed_point(prob, scheme, steps.beta, sol.x_star, sol.lambda_star);

  RunOptions options;
  options.max_iters = 2000;
  options.x_star = sol.x_star;
  options.fixed_point = &fp;
  options.certificate = &cert;
  const Trace trace = run(prob, scheme, steps, options);

  const double v0 = trace.rows[0].lyapunov;
  const double x0_err2 = sol.x_star.squaredNorm();  // x0 = 0
  const double weight_x = cert.c1 / cert.omega;
  const double envelope = v0 / (weight_x * x0_err2);  // bound on gap_k^2 / delta^k
  double worst = 0.0;
  double decay = 1.0;
  for (size_t k = 0; k < trace.rows.size(); ++k) {
    const double gap2 = trace.rows[k].gap * trace.rows[k].gap;
    worst = std::max(worst, gap2 / decay);
    decay *= cert.delta;
  }
  CHECK(worst <= envelope * (1.0 + 1e-9));
}
