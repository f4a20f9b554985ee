#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "latentact/align.hpp"
#include "latentact/distribution.hpp"
#include "latentact/env.hpp"

namespace latentact {

// Demonstrator policies pi_psi(a | o, e): per-state k x m logits, column
// softmax over actions.
struct PolicyParams {
  std::vector<Eigen::MatrixXd> logits;
  int k = 0;
  int m = 0;

  int num_states() const { return int(logits.size()); }
  Eigen::MatrixXd policy(int state) const;
};

// Transition model p_theta(. | o, a): tabular per-state n x k logits with
// column softmax over next states, or a gaussian head with per-(state,action)
// means and one shared log standard deviation.
struct TransitionParams {
  enum class Kind { kTabular, kGaussianHead };

  Kind kind = Kind::kTabular;
  std::vector<Eigen::MatrixXd> logits;  // tabular: [state] n x k
  std::vector<Eigen::MatrixXd> means;   // gaussian head: [state] d x k
  double log_sigma = 0.0;               // gaussian head, shared

  int num_states() const {
    return kind == Kind::kTabular ? int(logits.size()) : int(means.size());
  }
  Eigen::MatrixXd transition(int state) const;  // tabular only
  double sigma() const;
};

struct HyperParams {
  double lambda_vol = 1e-2;
  double lambda_pol = 1.0;
  double lambda_anchor = 0.0;
  double eps = 1e-6;
  double tau = 0.0;
  double step_size = 0.5;
  double backtrack_factor = 0.5;
  double init_noise = 0.05;
  int budget = 1000;
  std::uint64_t seed = 0;
  Kernel kernel = Kernel::FiniteDelta(1);  // gaussian-head volume kernel

  // tau = k log(1/k) - 1; kernel left to the caller for gaussian heads.
  static HyperParams Defaults(int k);

  void validate() const;
};

struct ModelShape {
  int num_states = 0;
  int k = 0;
  int m = 0;
  TransitionParams::Kind kind = TransitionParams::Kind::kTabular;
  int n_next = 0;  // tabular: size of the next-state space
  int dim = 0;     // gaussian head: observation dimension
};

struct FitReport {
  std::vector<double> fit, vol, pol, anchor, total;  // per accepted step
  double final_objective = 0.0;
  double final_fit = 0.0, final_vol = 0.0, final_pol = 0.0, final_anchor = 0.0;
  int accepted_steps = 0;
  bool diverged = false;
};

// Empirical negative log-likelihood of the mixture model
// p(o'|o,e) = sum_a pi_psi(a|o,e) p_theta(o'|o,a). Throws on a zero-density
// sample, naming the offending triple.
double nll_fit(const TransitionParams& theta, const PolicyParams& psi,
               const TrajectoryBatch& data);

// Mean over data states of log det(G_theta(o_i) + eps I_k) with the Gram of
// the k model transitions computed by the embedding module.
double reg_vol(const TransitionParams& theta, const std::vector<int>& data_states,
               const Kernel& kernel, double eps);

// Diversity barrier: mean over data states of
// [tau - log det(Pi_psi(o_i) Pi_psi(o_i)^T + eps I)]_+.
double reg_pol(const PolicyParams& psi, const std::vector<int>& data_states,
               double eps, double tau);

// Mean negative log probability of the labeled anchor actions.
double anchor_loss(const PolicyParams& psi, const AnchorDataset& anchors);

struct Gradients {
  std::vector<Eigen::MatrixXd> policy;      // per state, matches logits
  std::vector<Eigen::MatrixXd> transition;  // per state, logits or means
  double log_sigma = 0.0;
};

// Total objective L_fit + lambda_vol R_vol + lambda_pol R_pol +
// lambda_anchor L_anchor with analytic gradients; +inf (no throw) on
// underflowing mixtures so line searches can reject the step.
double total_objective(const TransitionParams& theta, const PolicyParams& psi,
                       const TrajectoryBatch& data, const AnchorDataset& anchors,
                       const HyperParams& hyper, Gradients* grads);

std::pair<TransitionParams, PolicyParams> initialize_params(
    const TrajectoryBatch& data, const ModelShape& shape, const HyperParams& hyper);

struct TrainResult {
  TransitionParams theta;
  PolicyParams psi;
  FitReport report;
};

// Full-batch gradient descent on the logits with backtracking, so the
// recorded total objective is non-increasing across accepted steps.
// Deterministic given hyper.seed. Budget counts accepted steps; zero budget
// returns the initialization unchanged.
TrainResult train(const TrajectoryBatch& data, const AnchorDataset& anchors,
                  const ModelShape& shape, const HyperParams& hyper);

struct EvalMetrics {
  std::vector<std::vector<int>> perm;  // per state, from best_permutation_error
  std::vector<double> tv_T;            // per state, max column TV under perm
  std::vector<double> tv_Pi;
  double max_tv_T = 0.0, max_tv_Pi = 0.0;
  double mean_tv_T = 0.0, mean_tv_Pi = 0.0;
};

// Best-permutation TV errors of the implied (T, Pi) against the environment's
// ground truth, per state and aggregate. Tabular parameterizations only.
EvalMetrics evaluate(const TransitionParams& theta, const PolicyParams& psi,
                     const LatentEnv& env);

// CSV rows (step, fit, vol, pol, anchor, total).
std::string fit_report_to_csv(const FitReport& report);

}  // namespace latentact
