#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "latentact/embedding.hpp"
#include "latentact/rng.hpp"

using namespace latentact;

namespace {

std::vector<TransitionDistribution> random_mixtures(
    const std::shared_ptr<const ComponentDictionary>& dict, int count,
    std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TransitionDistribution> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(
        TransitionDistribution::DictMixture(dict, rng.simplex_uniform(dict->size())));
  }
  return out;
}

std::shared_ptr<const ComponentDictionary> gaussian_dict(int components,
                                                         std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Eigen::VectorXd> means;
  for (int i = 0; i < components; ++i) means.push_back(rng.normal_vector(2));
  return ComponentDictionary::MakeGaussian(means, 0.05);
}

}  // namespace

static void BM_GramMatrix(benchmark::State& state) {
  const auto dict = gaussian_dict(int(state.range(0)), 5);
  const auto dists = random_mixtures(dict, 6, 7);
  for (auto _ : state) {
    Eigen::MatrixXd G = gram_matrix(dists, dict->kernel());
    benchmark::DoNotOptimize(G.data());
  }
}
BENCHMARK(BM_GramMatrix)->Arg(8)->Arg(16)->Arg(32);

static void BM_MmdDistance(benchmark::State& state) {
  const auto dict = gaussian_dict(8, 9);
  const auto dists = random_mixtures(dict, 2, 11);
  for (auto _ : state) {
    double d = mmd_distance(dists[0], dists[1], dict->kernel());
    benchmark::DoNotOptimize(d);
  }
}
BENCHMARK(BM_MmdDistance);

static void BM_ContinuousFactorize(benchmark::State& state) {
  const auto dict = gaussian_dict(8, 13);
  Rng rng(15);
  Eigen::MatrixXd C(8, 3);
  for (int a = 0; a < 3; ++a) C.col(a) = rng.simplex_uniform(8);
  Eigen::MatrixXd Pi(3, 5);
  Pi.leftCols(3) = Eigen::MatrixXd::Identity(3, 3);
  Pi.col(3) = rng.simplex_uniform(3);
  Pi.col(4) = rng.simplex_uniform(3);
  const Eigen::MatrixXd W = C * Pi;
  std::vector<TransitionDistribution> observables;
  for (int e = 0; e < 5; ++e) {
    observables.push_back(TransitionDistribution::DictMixture(dict, W.col(e)));
  }
  SolverOptions opts;
  opts.restarts = 2;
  for (auto _ : state) {
    ContinuousFactorization fact = continuous_minvol_factorize(observables, 3, opts);
    benchmark::DoNotOptimize(&fact);
  }
}
BENCHMARK(BM_ContinuousFactorize);
