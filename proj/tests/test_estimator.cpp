#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "latentact/embedding.hpp"
#include "latentact/estimator.hpp"
#include "latentact/env.hpp"
#include "latentact/numeric.hpp"
#include "latentact/rng.hpp"
#include "test_util.hpp"

using namespace latentact;

namespace {

PolicyParams policy_from_probs(const std::vector<Eigen::MatrixXd>& probs) {
  PolicyParams psi;
  psi.k = int(probs.front().rows());
  psi.m = int(probs.front().cols());
  for (const auto& p : probs) {
    psi.logits.push_back(p.array().max(1e-12).log().matrix());
  }
  return psi;
}

TransitionParams tabular_from_probs(const std::vector<Eigen::MatrixXd>& probs) {
  TransitionParams theta;
  theta.kind = TransitionParams::Kind::kTabular;
  for (const auto& p : probs) {
    theta.logits.push_back(p.array().max(1e-12).log().matrix());
  }
  return theta;
}

TrajectoryBatch batch_from_env(const LatentEnv& env, int n, std::uint64_t seed) {
  return sample_transitions(
      env, StartDistribution::Uniform(env.num_states(), env.m), n, seed);
}

}  // namespace

TEST_CASE("nll_fit reduces to the conditional NLL when k = 1") {
  const LatentEnv env = make_random_finite_env(4, 1, 2, 3, true);
  const TrajectoryBatch data = batch_from_env(env, 2000, 5);

  std::vector<Eigen::MatrixXd> t_probs, p_probs;
  for (int s = 0; s < env.num_states(); ++s) {
    t_probs.push_back(env.T_star[std::size_t(s)].matrix());
    p_probs.push_back(env.Pi_star[std::size_t(s)].matrix());
  }
  const TransitionParams theta = tabular_from_probs(t_probs);
  const PolicyParams psi = policy_from_probs(p_probs);

  // Direct oracle: mean -log p(o'|o) under the single transition column.
  double oracle = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    oracle -= std::log(
        env.T_star[std::size_t(data.state[i])](data.next_state[i], 0));
  }
  oracle /= double(data.size());
  CHECK(nll_fit(theta, psi, data) == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("nll_fit at the generating parameters matches the exact mixture") {
  const LatentEnv env = make_random_finite_env(5, 2, 4, 7, true);
  const TrajectoryBatch data = batch_from_env(env, 50000, 11);

  std::vector<Eigen::MatrixXd> t_probs, p_probs;
  for (int s = 0; s < env.num_states(); ++s) {
    t_probs.push_back(env.T_star[std::size_t(s)].matrix());
    p_probs.push_back(env.Pi_star[std::size_t(s)].matrix());
  }
  const double nll = nll_fit(tabular_from_probs(t_probs),
                             policy_from_probs(p_probs), data);

  // Oracle: evaluate the exact mixture likelihood of the same data directly.
  double oracle = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& T = env.T_star[std::size_t(data.state[i])].matrix();
    const auto& Pi = env.Pi_star[std::size_t(data.state[i])].matrix();
    const double q =
        T.row(data.next_state[i]).dot(Pi.col(data.demonstrator[i]));
    oracle -= std::log(q);
  }
  oracle /= double(data.size());
  CHECK(nll == doctest::Approx(oracle).epsilon(1e-12));
  // Large-sample value is close to the entropy rate of the generating law.
  CHECK(std::abs(nll - oracle) <= 0.01);
}

TEST_CASE("uniform model NLL equals log n") {
  const int n = 6;
  LatentEnv env = make_random_finite_env(n, 2, 3, 9, true);
  const TrajectoryBatch data = batch_from_env(env, 500, 13);

  std::vector<Eigen::MatrixXd> t_probs(
      std::size_t(n), Eigen::MatrixXd::Constant(n, 2, 1.0 / double(n)));
  std::vector<Eigen::MatrixXd> p_probs(
      std::size_t(n), Eigen::MatrixXd::Constant(2, 3, 0.5));
  CHECK(nll_fit(tabular_from_probs(t_probs), policy_from_probs(p_probs), data) ==
        doctest::Approx(std::log(double(n))).epsilon(1e-12));
}

TEST_CASE("reg_vol: collapsed transitions have smaller volume than distinct ones") {
  const int n = 5;
  const int k = 3;
  std::vector<int> data_states{0, 0, 1, 1, 1};

  Rng rng(derive_seed(61, "vol"));
  std::vector<Eigen::MatrixXd> collapsed, distinct;
  for (int s = 0; s < 2; ++s) {
    const Eigen::VectorXd shared = rng.simplex_uniform(n);
    Eigen::MatrixXd c(n, k);
    for (int a = 0; a < k; ++a) c.col(a) = shared;
    collapsed.push_back(c);
    distinct.push_back(test_util::random_stochastic(n, k, rng));
  }
  const Kernel kernel = Kernel::FiniteDelta(n);
  const double v_collapsed =
      reg_vol(tabular_from_probs(collapsed), data_states, kernel, 1e-6);
  const double v_distinct =
      reg_vol(tabular_from_probs(distinct), data_states, kernel, 1e-6);
  CHECK(v_collapsed < v_distinct);
}

TEST_CASE("reg_vol is monotone in eps") {
  Rng rng(derive_seed(62, "vol2"));
  std::vector<Eigen::MatrixXd> probs{test_util::random_stochastic(4, 2, rng)};
  const TransitionParams theta = tabular_from_probs(probs);
  const std::vector<int> states{0};
  const Kernel kernel = Kernel::FiniteDelta(4);
  double prev = reg_vol(theta, states, kernel, 1e-8);
  for (double eps : {1e-6, 1e-4, 1e-2, 1.0, 10.0}) {
    const double cur = reg_vol(theta, states, kernel, eps);
    CHECK(cur > prev);
    prev = cur;
  }
  // Large-eps limit: k log(eps) dominates.
  const double big = reg_vol(theta, states, kernel, 1e8);
  CHECK(big == doctest::Approx(2.0 * std::log(1e8)).epsilon(1e-3));
}

TEST_CASE("deterministic gaussian heads reduce the Gram to kernel evaluations") {
  // sigma = 0 model transitions are Dirac masses at the predicted points.
  TransitionParams theta;
  theta.kind = TransitionParams::Kind::kGaussianHead;
  Eigen::MatrixXd mu(2, 2);
  mu.col(0) << 0.0, 0.0;
  mu.col(1) << 1.0, 0.5;
  theta.means.push_back(mu);
  theta.log_sigma = -40.0;  // sigma^2 ~ 1e-35: numerically a point mass

  const Kernel kernel = Kernel::Gaussian(1.0, 2);
  const double val = reg_vol(theta, {0}, kernel, 1e-6);

  const double kxy = kernel.evaluate(mu.col(0), mu.col(1));
  Eigen::MatrixXd G(2, 2);
  G << 1.0 + 1e-6, kxy, kxy, 1.0 + 1e-6;
  CHECK(val == doctest::Approx(std::log(G.determinant())).epsilon(1e-9));
}

TEST_CASE("reg_pol hinge behavior") {
  const int k = 3;
  const int m = 3;
  std::vector<int> states{0};

  // Identity block: Pi Pi^T = I, log det ~ 0 >= tau for tau <= 0.
  std::vector<Eigen::MatrixXd> ident{Eigen::MatrixXd::Identity(k, m)};
  CHECK(reg_pol(policy_from_probs(ident), states, 1e-6, -1.0) == 0.0);

  // Shared policy: rank-1 Gram, penalty positive for moderate tau.
  std::vector<Eigen::MatrixXd> collapsed{
      Eigen::MatrixXd::Constant(k, m, 1.0 / double(k))};
  const double tau = double(k) * std::log(1.0 / double(k)) - 1.0;
  CHECK(reg_pol(policy_from_probs(collapsed), states, 1e-6, tau) > 0.0);

  // tau = -infinity disables the barrier.
  CHECK(reg_pol(policy_from_probs(collapsed), states, 1e-6,
                -std::numeric_limits<double>::infinity()) == 0.0);
}

TEST_CASE("anchor_loss closed forms and descent") {
  const int k = 2;
  AnchorDataset anchors;
  anchors.state = {0, 0, 0};
  anchors.demonstrator = {0, 1, 0};
  anchors.action = {0, 1, 0};

  // Probability one on the labeled actions: loss 0.
  Eigen::MatrixXd sure(k, 2);
  sure << 1.0, 0.0, 0.0, 1.0;
  CHECK(anchor_loss(policy_from_probs({sure}), anchors) ==
        doctest::Approx(0.0).epsilon(1e-9));

  // Uniform policy: loss log k.
  const Eigen::MatrixXd uniform = Eigen::MatrixXd::Constant(k, 2, 0.5);
  CHECK(anchor_loss(policy_from_probs({uniform}), anchors) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  CHECK_THROWS_AS(anchor_loss(policy_from_probs({uniform}), AnchorDataset{}),
                  std::invalid_argument);

  // One anchor-only gradient step decreases the loss.
  TrajectoryBatch data;
  data.state = {0};
  data.demonstrator = {0};
  data.next_state = {0};
  ModelShape shape;
  shape.num_states = 1;
  shape.k = k;
  shape.m = 2;
  shape.kind = TransitionParams::Kind::kTabular;
  shape.n_next = 2;
  HyperParams hyper = HyperParams::Defaults(k);
  hyper.lambda_vol = 0.0;
  hyper.lambda_pol = 0.0;
  hyper.lambda_anchor = 1.0;
  hyper.budget = 1;
  hyper.seed = 3;

  const auto [theta0, psi0] = initialize_params(data, shape, hyper);
  const double before = anchor_loss(psi0, anchors);
  const TrainResult fit = train(data, anchors, shape, hyper);
  REQUIRE(fit.report.accepted_steps == 1);
  CHECK(anchor_loss(fit.psi, anchors) < before);
}

TEST_CASE("analytic gradients match central finite differences") {
  // Covered at scale by the estimator-fit scenario; spot-check one instance
  // here including the gaussian head.
  Rng rng(derive_seed(63, "grad"));

  SUBCASE("tabular") {
    const int S = 2, n = 4, k = 2, m = 3;
    TrajectoryBatch data;
    for (int i = 0; i < 40; ++i) {
      data.state.push_back(int(rng.uniform_index(S)));
      data.demonstrator.push_back(int(rng.uniform_index(m)));
      data.next_state.push_back(int(rng.uniform_index(n)));
    }
    AnchorDataset anchors;
    anchors.state = {0, 1};
    anchors.demonstrator = {1, 2};
    anchors.action = {0, 1};

    HyperParams hyper = HyperParams::Defaults(k);
    hyper.lambda_vol = 0.05;
    hyper.lambda_pol = 0.8;
    hyper.lambda_anchor = 0.6;
    hyper.kernel = Kernel::FiniteDelta(n);

    TransitionParams theta;
    theta.kind = TransitionParams::Kind::kTabular;
    PolicyParams psi;
    psi.k = k;
    psi.m = m;
    for (int s = 0; s < S; ++s) {
      Eigen::MatrixXd tz(n, k), pz(k, m);
      for (Eigen::Index i = 0; i < tz.size(); ++i) tz(i) = rng.normal();
      for (Eigen::Index i = 0; i < pz.size(); ++i) pz(i) = rng.normal();
      theta.logits.push_back(tz);
      psi.logits.push_back(pz);
    }

    Gradients grads;
    total_objective(theta, psi, data, anchors, hyper, &grads);
    const double h = 1e-5;
    double worst = 0.0;
    double scale = 0.0;
    auto probe = [&](double* x, double analytic) {
      const double saved = *x;
      *x = saved + h;
      const double fp = total_objective(theta, psi, data, anchors, hyper, nullptr);
      *x = saved - h;
      const double fm = total_objective(theta, psi, data, anchors, hyper, nullptr);
      *x = saved;
      const double fd = (fp - fm) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - analytic));
      scale = std::max(scale, std::abs(fd));
    };
    for (int s = 0; s < S; ++s) {
      for (Eigen::Index i = 0; i < theta.logits[std::size_t(s)].size(); ++i) {
        probe(&theta.logits[std::size_t(s)](i), grads.transition[std::size_t(s)](i));
      }
      for (Eigen::Index i = 0; i < psi.logits[std::size_t(s)].size(); ++i) {
        probe(&psi.logits[std::size_t(s)](i), grads.policy[std::size_t(s)](i));
      }
    }
    CHECK(worst / std::max(scale, 1e-8) <= 1e-4);
  }

  SUBCASE("gaussian head") {
    const int S = 2, d = 2, k = 2, m = 2;
    TrajectoryBatch data;
    for (int i = 0; i < 30; ++i) {
      data.state.push_back(int(rng.uniform_index(S)));
      data.demonstrator.push_back(int(rng.uniform_index(m)));
      data.next_state.push_back(-1);
      data.next_point.push_back(rng.normal_vector(d));
    }

    HyperParams hyper = HyperParams::Defaults(k);
    hyper.lambda_vol = 0.1;
    hyper.lambda_pol = 0.5;
    hyper.lambda_anchor = 0.0;
    hyper.kernel = Kernel::Gaussian(0.7, d);

    TransitionParams theta;
    theta.kind = TransitionParams::Kind::kGaussianHead;
    theta.log_sigma = -0.3;
    PolicyParams psi;
    psi.k = k;
    psi.m = m;
    for (int s = 0; s < S; ++s) {
      Eigen::MatrixXd mu(d, k), pz(k, m);
      for (Eigen::Index i = 0; i < mu.size(); ++i) mu(i) = rng.normal();
      for (Eigen::Index i = 0; i < pz.size(); ++i) pz(i) = rng.normal();
      theta.means.push_back(mu);
      psi.logits.push_back(pz);
    }

    Gradients grads;
    total_objective(theta, psi, data, AnchorDataset{}, hyper, &grads);
    const double h = 1e-6;
    double worst = 0.0;
    double scale = 0.0;
    auto probe = [&](double* x, double analytic) {
      const double saved = *x;
      *x = saved + h;
      const double fp =
          total_objective(theta, psi, data, AnchorDataset{}, hyper, nullptr);
      *x = saved - h;
      const double fm =
          total_objective(theta, psi, data, AnchorDataset{}, hyper, nullptr);
      *x = saved;
      const double fd = (fp - fm) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - analytic));
      scale = std::max(scale, std::abs(fd));
    };
    for (int s = 0; s < S; ++s) {
      for (Eigen::Index i = 0; i < theta.means[std::size_t(s)].size(); ++i) {
        probe(&theta.means[std::size_t(s)](i), grads.transition[std::size_t(s)](i));
      }
      for (Eigen::Index i = 0; i < psi.logits[std::size_t(s)].size(); ++i) {
        probe(&psi.logits[std::size_t(s)](i), grads.policy[std::size_t(s)](i));
      }
    }
    probe(&theta.log_sigma, grads.log_sigma);
    CHECK(worst / std::max(scale, 1e-8) <= 1e-4);
  }
}

TEST_CASE("train: zero budget returns the initialization unchanged") {
  const LatentEnv env = make_random_finite_env(4, 2, 3, 17, true);
  const TrajectoryBatch data = batch_from_env(env, 1000, 19);
  ModelShape shape;
  shape.num_states = env.num_states();
  shape.k = env.k;
  shape.m = env.m;
  shape.kind = TransitionParams::Kind::kTabular;
  shape.n_next = env.space.size;

  HyperParams hyper = HyperParams::Defaults(env.k);
  hyper.lambda_anchor = 0.0;
  hyper.budget = 0;
  hyper.seed = 23;

  const auto [theta0, psi0] = initialize_params(data, shape, hyper);
  const TrainResult fit = train(data, AnchorDataset{}, shape, hyper);
  CHECK(fit.report.accepted_steps == 0);
  for (int s = 0; s < shape.num_states; ++s) {
    CHECK(test_util::max_abs(fit.theta.logits[std::size_t(s)] -
                             theta0.logits[std::size_t(s)]) == 0.0);
    CHECK(test_util::max_abs(fit.psi.logits[std::size_t(s)] -
                             psi0.logits[std::size_t(s)]) == 0.0);
  }
}

TEST_CASE("train: objective is non-increasing across accepted steps") {
  const LatentEnv env = make_random_finite_env(5, 2, 4, 29, true);
  const TrajectoryBatch data = batch_from_env(env, 5000, 31);
  const AnchorDataset anchors = sample_anchors(env, 10, 33);

  ModelShape shape;
  shape.num_states = env.num_states();
  shape.k = env.k;
  shape.m = env.m;
  shape.kind = TransitionParams::Kind::kTabular;
  shape.n_next = env.space.size;

  HyperParams hyper = HyperParams::Defaults(env.k);
  hyper.lambda_anchor = 1.0;
  hyper.budget = 150;
  hyper.seed = 37;

  const TrainResult fit = train(data, anchors, shape, hyper);
  REQUIRE(fit.report.total.size() > 10);
  for (std::size_t i = 1; i < fit.report.total.size(); ++i) {
    CHECK(fit.report.total[i] <= fit.report.total[i - 1] + 1e-12);
  }
  // Softmax outputs remain valid distributions.
  for (int s = 0; s < shape.num_states; ++s) {
    CHECK(StochasticMatrix::is_column_stochastic(fit.theta.transition(s)));
    CHECK(StochasticMatrix::is_column_stochastic(fit.psi.policy(s)));
  }
  // Determinism.
  const TrainResult again = train(data, anchors, shape, hyper);
  CHECK(again.report.final_objective == fit.report.final_objective);
}

TEST_CASE("train: anchors-only supervised fit recovers anchored policies") {
  // Transitions frozen at truth is emulated by letting only the anchor term
  // act on the policy: lambda_vol = lambda_pol = 0 and data consistent with
  // a near-deterministic policy.
  const int k = 2;
  AnchorDataset anchors;
  for (int i = 0; i < 50; ++i) {
    anchors.state.push_back(0);
    anchors.demonstrator.push_back(i % 2);
    anchors.action.push_back(i % 2);  // demonstrator e always uses action e
  }
  TrajectoryBatch data;
  data.state = {0};
  data.demonstrator = {0};
  data.next_state = {0};

  ModelShape shape;
  shape.num_states = 1;
  shape.k = k;
  shape.m = 2;
  shape.kind = TransitionParams::Kind::kTabular;
  shape.n_next = 2;

  HyperParams hyper = HyperParams::Defaults(k);
  hyper.lambda_vol = 0.0;
  hyper.lambda_pol = 0.0;
  hyper.lambda_anchor = 1.0;
  hyper.budget = 2000;
  hyper.step_size = 1.0;
  hyper.seed = 41;

  const TrainResult fit = train(data, anchors, shape, hyper);
  const double ce = anchor_loss(fit.psi, anchors);
  CHECK(ce <= 0.01);
}

TEST_CASE("evaluate: ground truth scores zero, relabeled truth scores zero") {
  const LatentEnv env = make_random_finite_env(5, 3, 4, 43, true);
  std::vector<Eigen::MatrixXd> t_probs, p_probs, t_perm, p_perm;
  const std::vector<int> perm{1, 2, 0};
  for (int s = 0; s < env.num_states(); ++s) {
    t_probs.push_back(env.T_star[std::size_t(s)].matrix());
    p_probs.push_back(env.Pi_star[std::size_t(s)].matrix());
    t_perm.push_back(permute_columns(env.T_star[std::size_t(s)].matrix(), perm));
    p_perm.push_back(permute_rows(env.Pi_star[std::size_t(s)].matrix(), perm));
  }

  const EvalMetrics exact =
      evaluate(tabular_from_probs(t_probs), policy_from_probs(p_probs), env);
  CHECK(exact.max_tv_T <= 1e-9);
  CHECK(exact.max_tv_Pi <= 1e-9);

  const EvalMetrics relabeled =
      evaluate(tabular_from_probs(t_perm), policy_from_probs(p_perm), env);
  CHECK(relabeled.max_tv_T <= 1e-9);
  CHECK(relabeled.max_tv_Pi <= 1e-9);

  // Random parameters evaluate without exceptions.
  Rng rng(derive_seed(64, "rand"));
  std::vector<Eigen::MatrixXd> t_rand, p_rand;
  for (int s = 0; s < env.num_states(); ++s) {
    t_rand.push_back(test_util::random_stochastic(5, 3, rng));
    p_rand.push_back(test_util::random_stochastic(3, 4, rng));
  }
  const EvalMetrics random_eval =
      evaluate(tabular_from_probs(t_rand), policy_from_probs(p_rand), env);
  CHECK(random_eval.max_tv_T <= 1.0);

  // Shape mismatch.
  const LatentEnv other = make_random_finite_env(4, 2, 3, 45, true);
  CHECK_THROWS_AS(
      evaluate(tabular_from_probs(t_probs), policy_from_probs(p_probs), other),
      std::invalid_argument);
}

TEST_CASE("gaussian-head training descends on a planted continuous mixture") {
  // Two actions with separated targets in R^2; two demonstrators, each pure.
  LatentEnv env;
  env.space = ObservationSpace::Continuous(2);
  env.k = 2;
  env.m = 2;
  env.states = {"s0", "s1"};
  Eigen::VectorXd near(2), far(2);
  near << 0.0, 0.0;
  far << 3.0, 1.0;
  for (int s = 0; s < 2; ++s) {
    env.T_star_continuous.push_back(
        {TransitionDistribution::Gaussian(near, 0.09),
         TransitionDistribution::Gaussian(far, 0.09)});
    env.Pi_star.emplace_back(Eigen::MatrixXd::Identity(2, 2));
  }
  const TrajectoryBatch data = batch_from_env(env, 4000, 71);

  ModelShape shape;
  shape.num_states = 2;
  shape.k = 2;
  shape.m = 2;
  shape.kind = TransitionParams::Kind::kGaussianHead;
  shape.dim = 2;

  HyperParams hyper = HyperParams::Defaults(2);
  hyper.lambda_vol = 1e-4;
  hyper.lambda_anchor = 0.0;
  hyper.budget = 800;
  hyper.step_size = 0.2;
  hyper.seed = 73;
  hyper.kernel = Kernel::Gaussian(1.0, 2);

  const TrainResult fit = train(data, AnchorDataset{}, shape, hyper);
  REQUIRE(fit.report.accepted_steps > 50);
  REQUIRE_FALSE(fit.report.diverged);
  for (std::size_t i = 1; i < fit.report.total.size(); ++i) {
    CHECK(fit.report.total[i] <= fit.report.total[i - 1] + 1e-12);
  }
  // The two recovered means per state should land near {near, far} in some
  // order, and sigma near the generating one.
  for (int s = 0; s < 2; ++s) {
    const Eigen::MatrixXd& mu = fit.theta.means[std::size_t(s)];
    const double direct = std::max((mu.col(0) - near).norm(), (mu.col(1) - far).norm());
    const double swapped = std::max((mu.col(0) - far).norm(), (mu.col(1) - near).norm());
    CHECK(std::min(direct, swapped) < 0.2);
  }
  CHECK(fit.theta.sigma() == doctest::Approx(0.3).epsilon(0.25));
}

TEST_CASE("fit report serializes as step,fit,vol,pol,anchor,total csv") {
  FitReport report;
  report.fit = {1.5, 1.25};
  report.vol = {-2.0, -2.5};
  report.pol = {0.0, 0.0};
  report.anchor = {0.5, 0.25};
  report.total = {0.0, -1.0};
  const std::string csv = fit_report_to_csv(report);
  CHECK(csv.substr(0, csv.find('\n')) == "step,fit,vol,pol,anchor,total");
  CHECK(csv.find("0,1.5,-2,0,0.5,0") != std::string::npos);
  CHECK(csv.find("1,1.25,-2.5,0,0.25,-1") != std::string::npos);
}

TEST_CASE("nll_fit reports the offending triple on zero density") {
  // A transition probability of exactly zero (logit -inf is unreachable, so
  // craft probabilities directly around the floor).
  std::vector<Eigen::MatrixXd> t_probs{(Eigen::MatrixXd(2, 1) << 1.0, 0.0).finished()};
  std::vector<Eigen::MatrixXd> p_probs{Eigen::MatrixXd::Ones(1, 1)};
  TransitionParams theta = tabular_from_probs(t_probs);
  // Force a hard zero in the mixture by an extreme logit gap.
  theta.logits[0](1, 0) = -1e6;
  TrajectoryBatch data;
  data.state = {0};
  data.demonstrator = {0};
  data.next_state = {1};
  CHECK_THROWS_WITH_AS(nll_fit(theta, policy_from_probs(p_probs), data),
                       doctest::Contains("o'=1"), std::runtime_error);
}
