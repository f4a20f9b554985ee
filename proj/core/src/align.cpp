#include "latentact/align.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "latentact/embedding.hpp"
#include "latentact/env.hpp"
#include "latentact/numeric.hpp"
#include "latentact/rng.hpp"

namespace latentact {

StateGraph StateGraph::Path(int n) {
  StateGraph g;
  g.num_nodes = n;
  for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
  return g;
}

StateGraph StateGraph::Edgeless(int n) {
  StateGraph g;
  g.num_nodes = n;
  return g;
}

StateGraph StateGraph::FromEdges(int n, std::vector<std::pair<int, int>> edges) {
  for (const auto& [u, v] : edges) {
    if (u < 0 || u >= n || v < 0 || v >= n || u == v) {
      throw std::invalid_argument("StateGraph: edge references invalid nodes");
    }
  }
  StateGraph g;
  g.num_nodes = n;
  g.edges = std::move(edges);
  return g;
}

std::vector<std::vector<int>> StateGraph::adjacency() const {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(num_nodes));
  for (const auto& [u, v] : edges) {
    adj[std::size_t(u)].push_back(v);
    adj[std::size_t(v)].push_back(u);
  }
  return adj;
}

std::vector<int> StateGraph::components() const {
  std::vector<int> comp(std::size_t(num_nodes), -1);
  const auto adj = adjacency();
  int next = 0;
  for (int start = 0; start < num_nodes; ++start) {
    if (comp[std::size_t(start)] >= 0) continue;
    std::deque<int> queue{start};
    comp[std::size_t(start)] = next;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : adj[std::size_t(u)]) {
        if (comp[std::size_t(v)] < 0) {
          comp[std::size_t(v)] = next;
          queue.push_back(v);
        }
      }
    }
    ++next;
  }
  return comp;
}

std::vector<int> PermutationAssignment::resolved_perm(int state) const {
  const auto& base = perm[std::size_t(state)];
  if (!anchor_resolved) return base;
  const int c = component_of[std::size_t(state)];
  if (!resolved[std::size_t(c)]) return base;
  return compose_permutations(base, sigma[std::size_t(c)]);
}

double separation_margin(const StatewiseFactorization& facts, int state) {
  const int k = facts.k();
  if (k < 2) return std::numeric_limits<double>::infinity();
  const auto& dists = facts.transitions[std::size_t(state)];
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      margin = std::min(margin, mmd_distance(dists[std::size_t(i)],
                                             dists[std::size_t(j)], facts.kernel));
    }
  }
  return margin;
}

namespace {

// Minimum-total-cost bijection via exhaustive k! search; also returns the
// largest matched entry of the chosen bijection.
struct Matching {
  std::vector<int> assignment;  // parent aligned label a -> child column
  double max_cost = 0.0;
};

Matching best_matching(const Eigen::MatrixXd& cost) {
  const int k = int(cost.rows());
  Matching best;
  double best_total = std::numeric_limits<double>::infinity();
  for_each_permutation(k, [&](const std::vector<int>& perm) {
    double total = 0.0;
    double max_cost = 0.0;
    for (int a = 0; a < k; ++a) {
      const double c = cost(a, perm[std::size_t(a)]);
      total += c;
      max_cost = std::max(max_cost, c);
    }
    if (total < best_total) {
      best_total = total;
      best.assignment = perm;
      best.max_cost = max_cost;
    }
  });
  return best;
}

}  // namespace

PermutationAssignment align_statewise(const StatewiseFactorization& facts,
                                      const StateGraph& graph, int root) {
  const int S = facts.num_states();
  const int k = facts.k();
  if (graph.num_nodes != S) {
    throw std::invalid_argument("align_statewise: graph does not cover all states");
  }
  if (root < 0 || root >= S) {
    throw std::invalid_argument("align_statewise: root out of range");
  }

  std::vector<double> margin(static_cast<std::size_t>(S));
  for (int s = 0; s < S; ++s) {
    margin[std::size_t(s)] = separation_margin(facts, s);
    if (!(margin[std::size_t(s)] > 0.0)) {
      std::ostringstream msg;
      msg << "align_statewise: zero separation margin at state " << s
          << " (no-collision condition violated)";
      throw std::runtime_error(msg.str());
    }
  }

  PermutationAssignment out;
  out.root = root;
  out.component_of = graph.components();
  out.num_components =
      out.component_of.empty()
          ? 0
          : 1 + *std::max_element(out.component_of.begin(), out.component_of.end());
  out.global = out.num_components == 1;
  out.perm.assign(std::size_t(S), {});

  const auto adj = graph.adjacency();
  std::vector<int> identity(static_cast<std::size_t>(k));
  std::iota(identity.begin(), identity.end(), 0);

  // BFS per component; the requested root seeds its own component, other
  // components start from their smallest node.
  std::vector<bool> visited(std::size_t(S), false);
  std::vector<int> roots(std::size_t(out.num_components), -1);
  roots[std::size_t(out.component_of[std::size_t(root)])] = root;
  for (int s = 0; s < S; ++s) {
    auto& r = roots[std::size_t(out.component_of[std::size_t(s)])];
    if (r < 0) r = s;
  }

  for (int comp_root : roots) {
    out.perm[std::size_t(comp_root)] = identity;
    visited[std::size_t(comp_root)] = true;
    std::deque<int> queue{comp_root};
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      const auto& perm_u = out.perm[std::size_t(u)];
      for (int v : adj[std::size_t(u)]) {
        if (visited[std::size_t(v)]) continue;
        // cost(a, b): distance from parent's aligned label a to child column b.
        Eigen::MatrixXd cost(k, k);
        for (int a = 0; a < k; ++a) {
          const auto& tu =
              facts.transitions[std::size_t(u)][std::size_t(perm_u[std::size_t(a)])];
          for (int b = 0; b < k; ++b) {
            cost(a, b) = mmd_distance(
                tu, facts.transitions[std::size_t(v)][std::size_t(b)], facts.kernel);
          }
        }
        const Matching match = best_matching(cost);
        const double threshold =
            0.5 * std::min(margin[std::size_t(u)], margin[std::size_t(v)]);
        if (!(match.max_cost < threshold)) {
          std::ostringstream msg;
          msg << "align_statewise: margin violation on edge (" << u << ", " << v
              << "): matched distance " << match.max_cost
              << " not below threshold " << threshold;
          throw std::runtime_error(msg.str());
        }
        out.perm[std::size_t(v)] = match.assignment;
        visited[std::size_t(v)] = true;
        queue.push_back(v);
      }
    }
  }

  // Certify every edge, including non-tree edges, against the delta/2 rule
  // under the composed labels.
  for (const auto& [u, v] : graph.edges) {
    const auto& pu = out.perm[std::size_t(u)];
    const auto& pv = out.perm[std::size_t(v)];
    EdgeCertificate cert;
    cert.u = u;
    cert.v = v;
    cert.threshold = 0.5 * std::min(margin[std::size_t(u)], margin[std::size_t(v)]);
    double max_cost = 0.0;
    for (int a = 0; a < k; ++a) {
      max_cost = std::max(
          max_cost,
          mmd_distance(
              facts.transitions[std::size_t(u)][std::size_t(pu[std::size_t(a)])],
              facts.transitions[std::size_t(v)][std::size_t(pv[std::size_t(a)])],
              facts.kernel));
    }
    cert.max_matched_distance = max_cost;
    cert.ok = max_cost < cert.threshold;
    if (!cert.ok) {
      std::ostringstream msg;
      msg << "align_statewise: margin violation on edge (" << u << ", " << v
          << "): composed labels disagree beyond the delta/2 threshold ("
          << max_cost << " >= " << cert.threshold << ")";
      throw std::runtime_error(msg.str());
    }
    out.certificates.push_back(cert);
  }
  return out;
}

AnchorResolution resolve_anchor(const StatewiseFactorization& facts,
                                PermutationAssignment& assignment,
                                const AnchorDataset& anchors) {
  if (anchors.size() == 0) {
    throw std::invalid_argument("resolve_anchor: empty anchor dataset");
  }
  const int k = facts.k();
  const int C = assignment.num_components;

  assignment.sigma.assign(std::size_t(C), {});
  assignment.confidence.assign(std::size_t(C), 0.0);
  assignment.tie.assign(std::size_t(C), false);
  assignment.resolved.assign(std::size_t(C), false);

  std::vector<std::vector<std::size_t>> anchors_by_component(
      static_cast<std::size_t>(C));
  for (std::size_t j = 0; j < anchors.size(); ++j) {
    const int s = anchors.state[j];
    if (s < 0 || s >= facts.num_states()) {
      throw std::invalid_argument("resolve_anchor: anchor state out of range");
    }
    if (anchors.action[j] < 0 || anchors.action[j] >= k) {
      throw std::invalid_argument("resolve_anchor: anchor action out of range");
    }
    anchors_by_component[std::size_t(assignment.component_of[std::size_t(s)])]
        .push_back(j);
  }

  AnchorResolution result;
  const int root_component =
      assignment.component_of[std::size_t(assignment.root)];
  for (int c = 0; c < C; ++c) {
    const auto& idx = anchors_by_component[std::size_t(c)];
    if (idx.empty()) continue;

    double best_ll = -std::numeric_limits<double>::infinity();
    double second_ll = -std::numeric_limits<double>::infinity();
    std::vector<int> best_sigma;
    for_each_permutation(k, [&](const std::vector<int>& sigma) {
      double ll = 0.0;
      for (std::size_t j : idx) {
        const int s = anchors.state[j];
        const int e = anchors.demonstrator[j];
        const int astar = anchors.action[j];
        const auto& perm_s = assignment.perm[std::size_t(s)];
        const int row = perm_s[std::size_t(sigma[std::size_t(astar)])];
        const double p = facts.pi[std::size_t(s)](row, e);
        ll += std::log(std::max(p, 1e-300));
      }
      if (ll > best_ll) {
        second_ll = best_ll;
        best_ll = ll;
        best_sigma = sigma;
      } else if (ll > second_ll) {
        second_ll = ll;
      }
    });

    assignment.sigma[std::size_t(c)] = best_sigma;
    const double gap = best_ll - second_ll;  // +inf when k! = 1
    assignment.confidence[std::size_t(c)] = gap;
    assignment.tie[std::size_t(c)] = gap <= 1e-12;
    assignment.resolved[std::size_t(c)] = true;
  }
  assignment.anchor_resolved = true;

  result.all_components_resolved =
      std::all_of(assignment.resolved.begin(), assignment.resolved.end(),
                  [](bool b) { return b; });
  if (assignment.resolved[std::size_t(root_component)]) {
    result.sigma = assignment.sigma[std::size_t(root_component)];
    result.confidence = assignment.confidence[std::size_t(root_component)];
    result.tie = assignment.tie[std::size_t(root_component)];
  }
  return result;
}

AnchorDataset sample_anchors(const LatentEnv& env, int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_anchors: count must be >= 1");
  env.validate();
  Rng rng(derive_seed(seed, "anchors"));
  AnchorDataset anchors;
  const int S = env.num_states();
  for (int j = 0; j < count; ++j) {
    // Stratified curation: states round-robin with demonstrators cycled both
    // across and within states, so the label budget spreads over the
    // (state, demonstrator) grid instead of leaving whole demonstrators (and
    // with them actions) unlabeled somewhere.
    const int s = j % S;
    const int e = (s + j / S) % env.m;
    const int a =
        int(rng.categorical(env.Pi_star[std::size_t(s)].matrix().col(e)));
    anchors.state.push_back(s);
    anchors.demonstrator.push_back(e);
    anchors.action.push_back(a);
  }
  return anchors;
}

}  // namespace latentact
