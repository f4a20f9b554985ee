#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "latentact/env.hpp"
#include "latentact/numeric.hpp"
#include "latentact/rng.hpp"
#include "test_util.hpp"

using namespace latentact;

TEST_CASE("mix_observable reproduces the two-action mixture") {
  // p(.|o) = 1/2 t_1 + 1/2 t_2 with unit-vector transitions.
  Eigen::MatrixXd t(2, 2);
  t << 1.0, 0.0, 0.0, 1.0;
  Eigen::MatrixXd pi(2, 1);
  pi << 0.5, 0.5;
  const StochasticMatrix P = mix_observable(StochasticMatrix(t), StochasticMatrix(pi));
  CHECK(P(0, 0) == doctest::Approx(0.5));
  CHECK(P(1, 0) == doctest::Approx(0.5));
}

TEST_CASE("mix_observable with identity mixing returns the transitions") {
  Rng rng(derive_seed(21, "mix"));
  const Eigen::MatrixXd T = test_util::random_stochastic(5, 3, rng);
  const StochasticMatrix P = mix_observable(
      StochasticMatrix(T), StochasticMatrix(Eigen::MatrixXd::Identity(3, 3)));
  CHECK(test_util::max_abs(P.matrix() - T) < 1e-15);
}

TEST_CASE("mix_observable equals the direct matrix product") {
  Rng rng(derive_seed(22, "mix2"));
  const Eigen::MatrixXd T = test_util::random_stochastic(6, 3, rng);
  const Eigen::MatrixXd Pi = test_util::random_stochastic(3, 5, rng);
  const StochasticMatrix P = mix_observable(StochasticMatrix(T), StochasticMatrix(Pi));
  CHECK(test_util::max_abs(P.matrix() - T * Pi) < 1e-15);
  CHECK(StochasticMatrix::max_column_sum_deviation(P.matrix()) < 1e-10);
}

TEST_CASE("mix_observable rejects bad inputs") {
  Rng rng(derive_seed(23, "mix3"));
  const Eigen::MatrixXd T = test_util::random_stochastic(4, 2, rng);
  const Eigen::MatrixXd Pi = test_util::random_stochastic(3, 2, rng);
  CHECK_THROWS_AS(mix_observable(StochasticMatrix(T), StochasticMatrix(Pi)),
                  std::invalid_argument);

  Eigen::MatrixXd bad = T;
  bad(0, 0) += 0.2;  // breaks the column sum
  CHECK_THROWS_WITH_AS(StochasticMatrix{bad},
                       doctest::Contains("column-sum deviation"),
                       std::invalid_argument);
}

TEST_CASE("mix_observable column sums stay within 1e-10 over random pairs") {
  Rng rng(derive_seed(24, "mix4"));
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + int(rng.uniform_index(6));
    const int k = 1 + int(rng.uniform_index(4));
    const int m = 1 + int(rng.uniform_index(5));
    const StochasticMatrix P =
        mix_observable(StochasticMatrix(test_util::random_stochastic(n, k, rng)),
                       StochasticMatrix(test_util::random_stochastic(k, m, rng)));
    CHECK(StochasticMatrix::max_column_sum_deviation(P.matrix()) <= 1e-10);
  }
}

TEST_CASE("sample_transitions is deterministic and respects deterministic kernels") {
  // Deterministic kernel: every column is a point mass.
  LatentEnv env;
  env.space = ObservationSpace::Finite(3);
  env.k = 2;
  env.m = 2;
  env.states = {"s0", "s1", "s2"};
  Eigen::MatrixXd T(3, 2);
  T << 1.0, 0.0,
       0.0, 0.0,
       0.0, 1.0;
  Eigen::MatrixXd Pi(2, 2);
  Pi << 1.0, 0.0, 0.0, 1.0;
  for (int s = 0; s < 3; ++s) {
    env.T_star.emplace_back(T);
    env.Pi_star.emplace_back(Pi);
  }

  const auto start = StartDistribution::Uniform(3, 2);
  const TrajectoryBatch batch = sample_transitions(env, start, 500, 99);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    // Demonstrator e picks action e deterministically; the transition column
    // is a point mass, so the next state is pinned.
    CHECK(batch.next_state[i] == (batch.demonstrator[i] == 0 ? 0 : 2));
  }

  const TrajectoryBatch again = sample_transitions(env, start, 500, 99);
  CHECK(again.state == batch.state);
  CHECK(again.demonstrator == batch.demonstrator);
  CHECK(again.next_state == batch.next_state);

  const TrajectoryBatch other = sample_transitions(env, start, 500, 100);
  CHECK(other.next_state != batch.next_state);
}

TEST_CASE("sampling consistency: empirical conditionals approach the exact law") {
  const LatentEnv env = make_random_finite_env(4, 2, 3, 1234, true);
  const int N = 100000;
  const TrajectoryBatch batch = sample_transitions(
      env, StartDistribution::Uniform(env.num_states(), env.m), N, 7);
  const auto conditionals = estimate_conditionals(batch, env);

  for (int s = 0; s < env.num_states(); ++s) {
    const StochasticMatrix P =
        mix_observable(env.T_star[std::size_t(s)], env.Pi_star[std::size_t(s)]);
    const auto& cond = conditionals[std::size_t(s)];
    for (int e = 0; e < env.m; ++e) {
      REQUIRE_FALSE(cond.missing[std::size_t(e)]);
      if (cond.counts.col(e).sum() < 5000) continue;
      const double tv = 0.5 * (cond.p_hat.col(e) - P.matrix().col(e)).lpNorm<1>();
      CHECK(tv <= 0.02);
    }
  }
}

TEST_CASE("estimate_conditionals flags missing columns and point data") {
  LatentEnv env;
  env.space = ObservationSpace::Finite(3);
  env.k = 1;
  env.m = 2;
  env.states = {"s0", "s1", "s2"};
  Eigen::MatrixXd T = Eigen::MatrixXd::Constant(3, 1, 1.0 / 3.0);
  Eigen::MatrixXd Pi = Eigen::MatrixXd::Ones(1, 2);
  for (int s = 0; s < 3; ++s) {
    env.T_star.emplace_back(T);
    env.Pi_star.emplace_back(Pi);
  }

  TrajectoryBatch batch;
  for (int i = 0; i < 3; ++i) {
    batch.state.push_back(1);
    batch.next_state.push_back(2);
    batch.demonstrator.push_back(1);
  }
  const auto conditionals = estimate_conditionals(batch, env);
  CHECK(conditionals[1].missing[0]);
  CHECK_FALSE(conditionals[1].missing[1]);
  CHECK(conditionals[1].p_hat(2, 1) == doctest::Approx(1.0));
  CHECK(conditionals[0].missing[0]);
  CHECK(conditionals[0].missing[1]);

  const TrajectoryBatch empty;
  const auto none = estimate_conditionals(empty, env);
  for (const auto& cond : none) {
    for (bool miss : cond.missing) CHECK(miss);
  }
}

TEST_CASE("counterexample: two exact factorizations not related by permutation") {
  const Counterexample ce = build_counterexample();
  const double res_a =
      (ce.observable.matrix() - ce.T_a.matrix() * ce.Pi_a.matrix()).norm();
  const double res_b =
      (ce.observable.matrix() - ce.T_b.matrix() * ce.Pi_b.matrix()).norm();
  CHECK(res_a <= 1e-15);
  CHECK(res_b <= 1e-15);

  // Min over both 2x2 permutations of the max-abs difference.
  double best = 1e300;
  for (const auto& perm : {std::vector<int>{0, 1}, std::vector<int>{1, 0}}) {
    best = std::min(best, test_util::max_abs(ce.T_a.matrix() -
                                             permute_columns(ce.T_b.matrix(), perm)));
  }
  CHECK(best >= 0.25);

  CHECK(StochasticMatrix::is_column_stochastic(ce.T_a.matrix()));
  CHECK(StochasticMatrix::is_column_stochastic(ce.T_b.matrix()));
  CHECK(StochasticMatrix::is_column_stochastic(ce.Pi_a.matrix()));
  CHECK(StochasticMatrix::is_column_stochastic(ce.Pi_b.matrix()));
}

TEST_CASE("environment generators satisfy their invariants") {
  const LatentEnv env = make_random_finite_env(6, 3, 5, 42, true);
  env.validate();
  CHECK(env.identifiable_by_construction);
  for (int s = 0; s < env.num_states(); ++s) {
    CHECK(numerical_rank(env.T_star[std::size_t(s)].matrix(), 1e-9) == 3);
    // Identity block present.
    CHECK(env.Pi_star[std::size_t(s)](0, 0) == doctest::Approx(1.0));
  }

  CHECK_THROWS_AS(make_random_finite_env(6, 4, 3, 1, true), std::invalid_argument);

  const LatentEnv path = make_smooth_path_env(10, 3, 5, 3);
  CHECK(path.num_states() == 10);
  CHECK(path.T_star_continuous[0].size() == 3);
}

TEST_CASE("env json round trip (finite)") {
  const LatentEnv env = make_random_finite_env(4, 2, 3, 77, true);
  const std::string text = env_to_json(env);
  const LatentEnv back = env_from_json(text);
  CHECK(back.k == env.k);
  CHECK(back.m == env.m);
  CHECK(back.states == env.states);
  for (int s = 0; s < env.num_states(); ++s) {
    CHECK(test_util::max_abs(back.T_star[std::size_t(s)].matrix() -
                             env.T_star[std::size_t(s)].matrix()) < 1e-15);
    CHECK(test_util::max_abs(back.Pi_star[std::size_t(s)].matrix() -
                             env.Pi_star[std::size_t(s)].matrix()) < 1e-15);
  }
}

TEST_CASE("env json round trip (continuous dictionary)") {
  const DictEnv dict_env = make_dict_mixture_env(2, 4, 2, 3, 2, 5);
  const std::string text = env_to_json(dict_env.env);
  const LatentEnv back = env_from_json(text);
  CHECK(back.num_states() == dict_env.env.num_states());
  CHECK(back.T_star_continuous[0][0].kind() ==
        TransitionDistribution::Kind::kDictMixture);
  const auto& w0 = dict_env.env.T_star_continuous[0][0].weights();
  CHECK(test_util::max_abs(back.T_star_continuous[0][0].weights() - w0) < 1e-15);
}

TEST_CASE("batch csv round trip") {
  LatentEnv env = make_random_finite_env(3, 2, 2, 9, true);
  const TrajectoryBatch batch = sample_transitions(
      env, StartDistribution::Uniform(env.num_states(), env.m), 50, 13);
  const std::string text = batch_to_csv(batch);
  const TrajectoryBatch back = batch_from_csv(text);
  CHECK(back.state == batch.state);
  CHECK(back.next_state == batch.next_state);
  CHECK(back.demonstrator == batch.demonstrator);
}

TEST_CASE("degenerate start distribution is rejected") {
  const LatentEnv env = make_random_finite_env(3, 2, 2, 11, true);
  StartDistribution start;
  start.weights = Eigen::MatrixXd::Zero(env.num_states(), env.m);
  CHECK_THROWS_AS(sample_transitions(env, start, 10, 1), std::invalid_argument);
}
