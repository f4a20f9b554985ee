// Acceptance suite: runs every acceptance criterion at its pinned threshold
// and prints one pass/fail line per criterion. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "latentact/align.hpp"
#include "latentact/embedding.hpp"
#include "latentact/env.hpp"
#include "latentact/minvol.hpp"
#include "latentact/numeric.hpp"
#include "latentact/rng.hpp"
#include "latentact/scenario.hpp"
#include "latentact/stochastic_matrix.hpp"
#include "latentact/thresholds.hpp"

using namespace latentact;
namespace th = latentact::thresholds;
using json = nlohmann::json;

namespace {

int failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

void report(int criterion, const std::string& name, bool pass,
            const std::string& detail) {
  if (!pass) ++failures;
  std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
}

ScenarioReport run(const std::string& config_text) {
  return run_scenario(validate_config_text(config_text));
}

double criterion_value(const ScenarioReport& r, const std::string& name) {
  for (const auto& c : r.criteria) {
    if (c.name == name) return c.value;
  }
  return std::nan("");
}

std::uint64_t master_seed() { return 20240811ULL; }

// --- criterion 1 -------------------------------------------------------------

void criterion_1() {
  Timer timer;
  const ScenarioReport rep = run(json{{"scenario", "prop1-counterexample"},
                                      {"seed", master_seed()}}
                                     .dump());
  const double elapsed = timer.seconds();
  std::ostringstream detail;
  detail << "residuals " << criterion_value(rep, "residual_decomposition_a")
         << "/" << criterion_value(rep, "residual_decomposition_b") << ", gap "
         << criterion_value(rep, "best_permutation_gap") << ", " << elapsed
         << " s";
  report(1, "non-identifiability counterexample",
         rep.pass && elapsed < th::kProp1RuntimeSec, detail.str());
}

// --- criterion 2 -------------------------------------------------------------

void criterion_2() {
  Timer timer;
  const ScenarioReport rep = run(json{{"scenario", "finite-recovery"},
                                      {"seed", master_seed()},
                                      {"mode", "exact"}}
                                     .dump());
  const double elapsed = timer.seconds();
  std::ostringstream detail;
  detail << int(criterion_value(rep, "recovery_successes")) << "/"
         << th::kFiniteExactEnvs << " recovered, max residual "
         << criterion_value(rep, "max_residual") << ", " << elapsed << " s";
  report(2, "finite-state recovery from exact observables",
         rep.pass && elapsed < th::kFiniteExactRuntimeSec, detail.str());
}

// --- criterion 3 -------------------------------------------------------------

void criterion_3() {
  Timer timer;
  const ScenarioReport rep = run(json{{"scenario", "finite-recovery"},
                                      {"seed", master_seed()},
                                      {"mode", "sampled"}}
                                     .dump());
  const double elapsed = timer.seconds();
  std::ostringstream detail;
  detail << "tv_T " << criterion_value(rep, "tv_error_T") << ", tv_Pi "
         << criterion_value(rep, "tv_error_Pi") << ", " << elapsed << " s";
  report(3, "finite-state recovery from sampled data",
         rep.pass && elapsed < th::kFiniteSampledRuntimeSec, detail.str());
}

// --- criterion 4 -------------------------------------------------------------

void criterion_4() {
  Rng rng(derive_seed(master_seed(), "acceptance-detbound"));
  Eigen::MatrixXd Pi(3, 6);
  Pi.leftCols(3) = Eigen::MatrixXd::Identity(3, 3);
  for (int e = 3; e < 6; ++e) Pi.col(e) = rng.simplex_uniform(3);
  const StochasticMatrix Pi_star{Eigen::MatrixXd(Pi)};

  int accepted = 0;
  bool bound_ok = true;
  bool perm_ok = true;
  double max_det = 0.0;
  int attempts = 0;
  while (accepted < th::kDetBoundSamples && attempts < 2000000) {
    ++attempts;
    std::vector<int> perm{0, 1, 2};
    for (std::size_t i = perm.size(); i > 1; --i) {
      std::swap(perm[i - 1], perm[std::size_t(rng.uniform_index(i))]);
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 3);
    for (int j = 0; j < 3; ++j) A(perm[std::size_t(j)], j) = 1.0;
    const double u = rng.uniform();
    const double scale = 0.35 * u * u;
    for (Eigen::Index i = 0; i < A.size(); ++i) A(i) += scale * rng.normal();
    for (int j = 0; j < 3; ++j) {
      A.col(j).array() += (1.0 - A.col(j).sum()) / 3.0;
    }
    const DetBoundReport rep = check_det_bound(A, Pi_star);
    if (!rep.feasible) continue;
    ++accepted;
    max_det = std::max(max_det, rep.abs_det);
    if (rep.abs_det > 1.0 + th::kDetBoundSlack) bound_ok = false;
    if (rep.abs_det > 1.0 - th::kDetNearExtremalSlack &&
        rep.distance_to_permutation > th::kDetPermDistanceMax) {
      perm_ok = false;
    }
  }
  std::ostringstream detail;
  detail << accepted << " feasible samples, max |det A| = " << max_det;
  report(4, "determinant-bound lemma",
         accepted == th::kDetBoundSamples && bound_ok && perm_ok, detail.str());
}

// --- criterion 5 -------------------------------------------------------------

void criterion_5() {
  Rng rng(derive_seed(master_seed(), "acceptance-noscale"));
  bool ok = true;
  int checked = 0;
  for (int trial = 0; trial < th::kNoScalingTrials; ++trial) {
    const int k = 2 + int(rng.uniform_index(3));
    Eigen::MatrixXd T(5, k), Pi(k, 4);
    for (int a = 0; a < k; ++a) T.col(a) = rng.simplex_uniform(5);
    for (int e = 0; e < 4; ++e) Pi.col(e) = rng.simplex_uniform(k);

    Eigen::VectorXd d = Eigen::VectorXd::Ones(k);
    if (trial % 2 == 1) {
      for (int a = 0; a < k; ++a) d(a) = 1.0 + rng.uniform(-0.5, 0.5);
    }
    const Eigen::MatrixXd T2 = T * d.asDiagonal();
    const Eigen::MatrixXd Pi2 = d.cwiseInverse().asDiagonal() * Pi;
    const bool all_stochastic =
        StochasticMatrix::is_column_stochastic(T, th::kNoScalingTol, 1e-12) &&
        StochasticMatrix::is_column_stochastic(Pi, th::kNoScalingTol, 1e-12) &&
        StochasticMatrix::is_column_stochastic(T2, th::kNoScalingTol, 1e-12) &&
        StochasticMatrix::is_column_stochastic(Pi2, th::kNoScalingTol, 1e-12);
    if (all_stochastic) {
      ++checked;
      if ((d.array() - 1.0).abs().maxCoeff() > th::kNoScalingTol) ok = false;
    } else if ((d.array() - 1.0).abs().maxCoeff() <= th::kNoScalingTol) {
      // D = I must never break stochasticity.
      ok = false;
    }
  }
  std::ostringstream detail;
  detail << checked << "/" << th::kNoScalingTrials
         << " constructions column-stochastic, all with D = I";
  report(5, "no-diagonal-scaling lemma", ok && checked >= 200, detail.str());
}

// --- criterion 6 -------------------------------------------------------------

void criterion_6() {
  Rng rng(derive_seed(master_seed(), "acceptance-embed"));
  const Kernel kernel = Kernel::Gaussian(0.8, 2);

  bool mc_ok = true;
  double worst_rel = 0.0;
  for (int pair = 0; pair < th::kGramMcPairs; ++pair) {
    Eigen::VectorXd mu_p(2), mu_q(2);
    mu_p << rng.uniform(-1, 1), rng.uniform(-1, 1);
    mu_q << rng.uniform(-1, 1), rng.uniform(-1, 1);
    const auto p = TransitionDistribution::Gaussian(mu_p, rng.uniform(0.0, 0.5));
    const auto q = TransitionDistribution::Gaussian(mu_q, rng.uniform(0.0, 0.5));
    const double closed = mean_embedding_inner(p, q, kernel);

    Rng mc_rng(derive_seed(master_seed(), "acceptance-mc", std::uint64_t(pair)));
    double acc = 0.0;
    for (int i = 0; i < th::kGramMcSamples; ++i) {
      acc += kernel.evaluate(p.sample(mc_rng), q.sample(mc_rng));
    }
    const double mc = acc / double(th::kGramMcSamples);
    const double rel = std::abs(closed - mc) / std::max(std::abs(mc), 1e-12);
    worst_rel = std::max(worst_rel, rel);
    if (rel > th::kGramMcRelErrMax) mc_ok = false;
  }

  bool psd_ok = true;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TransitionDistribution> dists;
    const int count = 2 + int(rng.uniform_index(5));
    for (int i = 0; i < count; ++i) {
      Eigen::VectorXd mu(2);
      mu << rng.uniform(-2, 2), rng.uniform(-2, 2);
      dists.push_back(TransitionDistribution::Gaussian(mu, rng.uniform(0.0, 0.4)));
    }
    const Eigen::MatrixXd G = gram_matrix(dists, kernel);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    if (es.eigenvalues().minCoeff() < th::kGramMinEigenvalue) psd_ok = false;
  }

  // Finite-delta continuous path against the finite solver on the same data.
  bool equiv_ok = true;
  double worst_equiv = 0.0;
  {
    const auto dict = ComponentDictionary::MakeCategoricalAtoms(6);
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::MatrixXd T_star(6, 3), Pi_star(3, 5);
      for (int a = 0; a < 3; ++a) T_star.col(a) = rng.simplex_uniform(6);
      Pi_star.leftCols(3) = Eigen::MatrixXd::Identity(3, 3);
      Pi_star.col(3) = rng.simplex_uniform(3);
      Pi_star.col(4) = rng.simplex_uniform(3);
      const Eigen::MatrixXd P = T_star * Pi_star;

      std::vector<TransitionDistribution> observables;
      for (int e = 0; e < 5; ++e) {
        observables.push_back(TransitionDistribution::DictMixture(dict, P.col(e)));
      }
      SolverOptions opts;
      opts.k = 3;
      opts.seed = derive_seed(master_seed(), "acceptance-equiv", std::uint64_t(trial));
      const ContinuousFactorization cont =
          continuous_minvol_factorize(observables, 3, opts);
      const FactorizationResult finite =
          minvol_factorize(StochasticMatrix(Eigen::MatrixXd(P)), opts);
      const double diff = std::max(
          (cont.coords.matrix() - finite.T.matrix()).cwiseAbs().maxCoeff(),
          (cont.Pi.matrix() - finite.Pi.matrix()).cwiseAbs().maxCoeff());
      worst_equiv = std::max(worst_equiv, diff);
      if (diff > th::kFiniteDeltaEquivalenceTol) equiv_ok = false;
    }
  }

  std::ostringstream detail;
  detail << "MC rel err " << worst_rel << ", solver equivalence diff "
         << worst_equiv;
  report(6, "embedding correctness", mc_ok && psd_ok && equiv_ok, detail.str());
}

// --- criterion 7 -------------------------------------------------------------

void criterion_7() {
  Timer timer;
  const ScenarioReport rep = run(json{{"scenario", "continuous-recovery"},
                                      {"seed", master_seed()}}
                                     .dump());
  const double elapsed = timer.seconds();
  std::ostringstream detail;
  detail << "coordinate error " << criterion_value(rep, "coordinate_error")
         << ", " << elapsed << " s";
  report(7, "continuous recovery via gaussian dictionary",
         rep.pass && elapsed < th::kContRuntimeSec, detail.str());
}

// --- criterion 8 -------------------------------------------------------------

void criterion_8() {
  const ScenarioReport rep = run(json{{"scenario", "global-alignment"},
                                      {"seed", master_seed()}}
                                     .dump());
  std::ostringstream detail;
  detail << "confidence " << criterion_value(rep, "anchor_confidence")
         << ", components(variant) "
         << int(criterion_value(rep, "variant_components"));
  report(8, "global alignment and anchor resolution", rep.pass, detail.str());
}

// --- criterion 9 -------------------------------------------------------------

void criterion_9() {
  const ScenarioReport rep = run(json{{"scenario", "estimator-fit"},
                                      {"seed", master_seed()}}
                                     .dump());
  std::ostringstream detail;
  detail << "tv_T " << criterion_value(rep, "post_alignment_tv_T") << ", tv_Pi "
         << criterion_value(rep, "post_alignment_tv_Pi") << ", grad rel err "
         << criterion_value(rep, "gradient_check_rel_err") << ", ablation gap "
         << criterion_value(rep, "ablation_logdet_gap");
  report(9, "regularized maximum-likelihood estimator", rep.pass, detail.str());
}

// --- criterion 10 ------------------------------------------------------------

void criterion_10() {
  const ScenarioReport rep = run(json{{"scenario", "diversity-audit"},
                                      {"seed", master_seed()}}
                                     .dump());
  std::ostringstream detail;
  detail << "monotone trials "
         << int(criterion_value(rep, "mc_monotone_trials")) << "/"
         << th::kDiversityMonotoneTrials;
  report(10, "diversity audit verdicts", rep.pass, detail.str());
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  if (failures == 0) {
    std::printf("acceptance: all criteria passed\n");
  } else {
    std::printf("acceptance: %d criteria failed\n", failures);
  }
  return failures;
}
