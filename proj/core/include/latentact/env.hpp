#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "latentact/distribution.hpp"
#include "latentact/embedding.hpp"
#include "latentact/stochastic_matrix.hpp"

namespace latentact {

struct ObservationSpace {
  enum class Kind { kFinite, kContinuous };

  Kind kind = Kind::kFinite;
  int size = 0;       // finite spaces
  int dimension = 0;  // continuous spaces
  std::vector<Eigen::VectorXd> grid;  // optional evaluation states (continuous)

  static ObservationSpace Finite(int n);
  static ObservationSpace Continuous(int d, std::vector<Eigen::VectorXd> grid = {});
};

// Ground-truth world: per-state latent transition factor and policy matrix
// over k latent actions and m demonstrators.
struct LatentEnv {
  ObservationSpace space;
  int k = 0;
  int m = 0;
  std::vector<std::string> states;

  // Finite spaces: per-state n x k transition factor.
  std::vector<StochasticMatrix> T_star;
  // Continuous spaces: per-state list of k transition laws.
  std::vector<std::vector<TransitionDistribution>> T_star_continuous;

  std::vector<StochasticMatrix> Pi_star;  // per-state k x m

  bool identifiable_by_construction = false;

  int num_states() const { return int(states.size()); }
  bool finite() const { return space.kind == ObservationSpace::Kind::kFinite; }

  // Checks the structural invariants (column sums within 1e-12, shapes,
  // k <= m when flagged identifiable-by-construction). Throws on violation.
  void validate() const;
};

// Observable data tuples (o, o_next, e) plus the master seed used.
struct TrajectoryBatch {
  std::vector<int> state;
  std::vector<int> demonstrator;
  std::vector<int> next_state;               // finite spaces; -1 when continuous
  std::vector<Eigen::VectorXd> next_point;   // continuous spaces only
  std::uint64_t seed = 0;

  std::size_t size() const { return state.size(); }
};

// Distribution over (state, demonstrator) start pairs.
struct StartDistribution {
  Eigen::MatrixXd weights;  // num_states x m, nonnegative, positive total mass

  static StartDistribution Uniform(int num_states, int m);
};

// Per-state empirical next-state law; columns with zero count are flagged
// missing rather than fabricated.
struct EmpiricalConditional {
  Eigen::MatrixXd counts;  // n x m
  Eigen::MatrixXd p_hat;   // n x m; missing columns left at zero
  std::vector<bool> missing;
  double total = 0.0;

  double min_present_count() const;
};

// Observable matrix P_o = T_o Pi_o. Inputs must be column-stochastic within
// 1e-10 and conforming; the product is column-stochastic by construction.
StochasticMatrix mix_observable(const StochasticMatrix& T_o,
                                const StochasticMatrix& Pi_o);

// Draws N i.i.d. triples: (o, e) from the start distribution, a from the
// demonstrator's policy column, o' from the chosen transition column.
TrajectoryBatch sample_transitions(const LatentEnv& env,
                                   const StartDistribution& start, int n,
                                   std::uint64_t seed);

// Empirical conditional laws per state, finite spaces only.
std::vector<EmpiricalConditional> estimate_conditionals(const TrajectoryBatch& batch,
                                                        const LatentEnv& env);

// The two non-permutation-related exact decompositions of the single
// observable column (1/2, 1/2): identity transitions vs (3/4,1/4)-(1/4,3/4),
// both with equal mixing weights.
struct Counterexample {
  StochasticMatrix observable;  // 2 x 1
  StochasticMatrix T_a;         // 2 x 2
  StochasticMatrix Pi_a;        // 2 x 1
  StochasticMatrix T_b;
  StochasticMatrix Pi_b;
};

Counterexample build_counterexample();

// --- Synthetic environment generators -------------------------------------

// Random finite environment; with separable_policy the policy matrix is
// [I_k | random stochastic columns], which makes it sufficiently scattered by
// construction (requires m >= k). Resamples until rank(P_o) = k at each state.
LatentEnv make_random_finite_env(int n, int k, int m, std::uint64_t seed,
                                 bool separable_policy);

struct DictEnv {
  LatentEnv env;
  std::shared_ptr<const ComponentDictionary> dictionary;
  std::vector<StochasticMatrix> coords_star;  // per-state D x k ground truth
};

// Continuous environment whose latent transitions are mixtures over a shared
// gaussian dictionary (component means sampled in [-spread, spread]^d). A
// non-positive bandwidth selects the median heuristic.
DictEnv make_dict_mixture_env(int d, int num_components, int k, int m,
                              int num_states, std::uint64_t seed,
                              double component_variance = 0.05,
                              double spread = 2.0, double bandwidth = 0.0);

// Continuous environment on a path of states with Dirac transitions moving
// smoothly with the state index; adjacent states differ by ~1/(nodes-1) while
// distinct actions stay separated by ~1 in observation space.
LatentEnv make_smooth_path_env(int nodes, int k, int m, std::uint64_t seed);

// --- Serialization ---------------------------------------------------------

std::string env_to_json(const LatentEnv& env);
LatentEnv env_from_json(const std::string& text);

std::string batch_to_csv(const TrajectoryBatch& batch);
TrajectoryBatch batch_from_csv(const std::string& text);

}  // namespace latentact
