#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "latentact/numeric.hpp"
#include "latentact/rng.hpp"

using namespace latentact;

static void BM_SimplexProjection(benchmark::State& state) {
  Rng rng(1);
  const Eigen::VectorXd v = rng.normal_vector(state.range(0));
  for (auto _ : state) {
    Eigen::VectorXd p = project_to_simplex(v);
    benchmark::DoNotOptimize(p.data());
  }
}
BENCHMARK(BM_SimplexProjection)->Arg(8)->Arg(64)->Arg(512);

static void BM_SimplexLeastSquares(benchmark::State& state) {
  Rng rng(2);
  const int k = int(state.range(0));
  Eigen::MatrixXd A(12, k);
  for (int c = 0; c < k; ++c) A.col(c) = rng.simplex_uniform(12);
  const Eigen::VectorXd b = A * rng.simplex_uniform(k);
  for (auto _ : state) {
    Eigen::VectorXd x = simplex_least_squares(A, b);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_SimplexLeastSquares)->Arg(3)->Arg(5)->Arg(8);

static void BM_Nnls(benchmark::State& state) {
  Rng rng(3);
  const int k = int(state.range(0));
  Eigen::MatrixXd A(k, k);
  for (Eigen::Index i = 0; i < A.size(); ++i) A(i) = rng.uniform();
  const Eigen::VectorXd b = rng.normal_vector(k);
  for (auto _ : state) {
    Eigen::VectorXd x = nnls(A, b);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_Nnls)->Arg(3)->Arg(6)->Arg(12);

BENCHMARK_MAIN();
