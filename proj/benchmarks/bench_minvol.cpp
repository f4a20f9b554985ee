#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "latentact/env.hpp"
#include "latentact/minvol.hpp"
#include "latentact/rng.hpp"

using namespace latentact;

namespace {

StochasticMatrix planted_observable(int n, int k, int m, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd T(n, k);
  for (int a = 0; a < k; ++a) T.col(a) = rng.simplex_uniform(n);
  Eigen::MatrixXd Pi(k, m);
  Pi.leftCols(k) = Eigen::MatrixXd::Identity(k, k);
  for (int e = k; e < m; ++e) Pi.col(e) = rng.simplex_uniform(k);
  return StochasticMatrix(Eigen::MatrixXd(T * Pi));
}

}  // namespace

static void BM_SpaInit(benchmark::State& state) {
  const int n = int(state.range(0));
  const StochasticMatrix P = planted_observable(n, 3, 8, 7);
  for (auto _ : state) {
    auto idx = spa_init(P.matrix(), 3);
    benchmark::DoNotOptimize(idx.data());
  }
}
BENCHMARK(BM_SpaInit)->Arg(6)->Arg(20)->Arg(60);

static void BM_MinvolFactorize(benchmark::State& state) {
  const int n = int(state.range(0));
  const int k = int(state.range(1));
  const StochasticMatrix P = planted_observable(n, k, k + 2, 11);
  SolverOptions opts;
  opts.k = k;
  opts.restarts = 2;
  for (auto _ : state) {
    FactorizationResult fact = minvol_factorize(P, opts);
    benchmark::DoNotOptimize(&fact);
  }
}
BENCHMARK(BM_MinvolFactorize)->Args({6, 3})->Args({10, 4})->Args({16, 5});

static void BM_BestPermutation(benchmark::State& state) {
  const int k = int(state.range(0));
  Rng rng(13);
  Eigen::MatrixXd T(8, k), Pi(k, k + 2);
  for (int a = 0; a < k; ++a) T.col(a) = rng.simplex_uniform(8);
  for (int e = 0; e < k + 2; ++e) Pi.col(e) = rng.simplex_uniform(k);
  for (auto _ : state) {
    PermutationMatch match = best_permutation_error(T, T, Pi, Pi);
    benchmark::DoNotOptimize(&match);
  }
}
BENCHMARK(BM_BestPermutation)->Arg(3)->Arg(5)->Arg(7);
