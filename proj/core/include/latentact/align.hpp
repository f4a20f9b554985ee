#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "latentact/distribution.hpp"

namespace latentact {

struct LatentEnv;

// Discrete surrogate for the connected observation space: nodes are states,
// edges connect states whose transition families are expected to be close.
struct StateGraph {
  int num_nodes = 0;
  std::vector<std::pair<int, int>> edges;

  static StateGraph Path(int n);
  static StateGraph Edgeless(int n);
  static StateGraph FromEdges(int n, std::vector<std::pair<int, int>> edges);

  std::vector<std::vector<int>> adjacency() const;
  // Component id per node, ids compacted from 0.
  std::vector<int> components() const;
};

// Per-state recovered transition list and policy matrix, all shapes uniform.
struct StatewiseFactorization {
  std::vector<std::vector<TransitionDistribution>> transitions;  // [state][action]
  std::vector<Eigen::MatrixXd> pi;                               // [state] k x m
  Kernel kernel;

  int num_states() const { return int(transitions.size()); }
  int k() const { return transitions.empty() ? 0 : int(transitions.front().size()); }
};

struct EdgeCertificate {
  int u = 0;
  int v = 0;
  double max_matched_distance = 0.0;
  double threshold = 0.0;  // min(margin(u), margin(v)) / 2
  bool ok = false;
};

// Per-state relabeling: aligned label a at state s refers to original column
// perm[s][a]. Aligned labels agree along every graph edge; with a connected
// graph they differ from the truth by one global permutation.
struct PermutationAssignment {
  std::vector<std::vector<int>> perm;
  bool global = false;
  int root = 0;
  int num_components = 1;
  std::vector<int> component_of;
  std::vector<EdgeCertificate> certificates;

  // Filled by resolve_anchor.
  bool anchor_resolved = false;
  std::vector<std::vector<int>> sigma;  // per component: true label -> aligned label
  std::vector<double> confidence;       // per component: log-lik gap to runner-up
  std::vector<bool> tie;                // per component
  std::vector<bool> resolved;           // per component: anchors were available

  // Final relabeling after anchor resolution: true label a at state s refers
  // to original column resolved_perm(s)[a].
  std::vector<int> resolved_perm(int state) const;
};

// Labeled side information (o, e, a*) fixing the residual permutation.
struct AnchorDataset {
  std::vector<int> state;
  std::vector<int> demonstrator;
  std::vector<int> action;

  std::size_t size() const { return state.size(); }
};

// Minimum pairwise embedded distance among a state's recovered transitions;
// +infinity (by convention) when k < 2.
double separation_margin(const StatewiseFactorization& facts, int state);

// BFS label propagation from the root: each edge matches child columns to the
// parent's aligned columns by minimum-total-mmd assignment over the k!
// permutations, and every graph edge must pass the delta/2 certificate
// (matched distances < min(margin(u), margin(v)) / 2). Throws on a margin
// violation naming the offending edge. Disconnected graphs align each
// component from its own root and report global = false.
PermutationAssignment align_statewise(const StatewiseFactorization& facts,
                                      const StateGraph& graph, int root);

struct AnchorResolution {
  std::vector<int> sigma;  // root component: true label -> aligned label
  double confidence = 0.0;
  bool tie = false;
  bool all_components_resolved = false;
};

// Selects, per component, the permutation Sigma maximizing the anchor
// log-likelihood sum_j log Pi_aligned(o_j)[Sigma(a*_j), e_j], applies it to
// the assignment, and reports the log-likelihood gap to the runner-up as
// confidence. Ties are reported with confidence 0, not silently broken.
AnchorResolution resolve_anchor(const StatewiseFactorization& facts,
                                PermutationAssignment& assignment,
                                const AnchorDataset& anchors);

// Planted anchor generation from a ground-truth environment: stratified over
// states, demonstrators cycled, true actions sampled from the policy.
AnchorDataset sample_anchors(const LatentEnv& env, int count, std::uint64_t seed);

}  // namespace latentact
