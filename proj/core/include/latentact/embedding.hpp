#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "latentact/distribution.hpp"
#include "latentact/minvol.hpp"
#include "latentact/stochastic_matrix.hpp"

namespace latentact {

// Shared basis of elementary next-observation laws. Dictionary mixtures carry
// their coordinates over these components; the pairwise embedding Gram under
// the dictionary's kernel is precomputed once.
class ComponentDictionary {
 public:
  ComponentDictionary(std::vector<TransitionDistribution> components, Kernel kernel);

  int size() const { return int(components_.size()); }
  const TransitionDistribution& component(int i) const;
  const std::vector<TransitionDistribution>& components() const { return components_; }
  const Kernel& kernel() const { return kernel_; }
  const Eigen::MatrixXd& gram() const { return gram_; }

  // Dictionary of isotropic gaussian components. A non-positive bandwidth
  // selects the median heuristic over the component means.
  static std::shared_ptr<const ComponentDictionary> MakeGaussian(
      const std::vector<Eigen::VectorXd>& means, double variance,
      double bandwidth = 0.0);

  // Dictionary whose components are the unit point masses of an n-point
  // finite space under the finite-delta kernel; its Gram is the identity, so
  // the dictionary-coordinate theory reduces exactly to the finite theory.
  static std::shared_ptr<const ComponentDictionary> MakeCategoricalAtoms(int n);

 private:
  std::vector<TransitionDistribution> components_;
  Kernel kernel_;
  Eigen::MatrixXd gram_;
};

double median_heuristic_bandwidth(const std::vector<Eigen::VectorXd>& points);

// <Phi(p), Phi(q)> under the kernel's mean embedding, by closed form:
//   categorical x categorical (finite-delta):  w_p . w_q
//   gaussian x gaussian (gaussian kernel):
//       (h^2/(h^2+s2))^{d/2} exp(-||mu_p-mu_q||^2 / (2(h^2+s2))), s2 = var_p+var_q
//   dirac x dirac: k(x_p, x_q)   (variance-zero gaussian case)
//   empirical: mean pairwise kernel against the other side
//   dict mixture: coordinates against the dictionary Gram / cross recursion
double mean_embedding_inner(const TransitionDistribution& p,
                            const TransitionDistribution& q, const Kernel& kernel);

// Embedded Gram matrix G[i][j] = <Phi(d_i), Phi(d_j)>; symmetric, PSD up to
// round-off.
Eigen::MatrixXd gram_matrix(const std::vector<TransitionDistribution>& dists,
                            const Kernel& kernel);

// Number of Gram eigenvalues above tol * largest eigenvalue.
int embedded_rank(const std::vector<TransitionDistribution>& dists,
                  const Kernel& kernel, double tol);

// ||Phi(p) - Phi(q)||_H = sqrt(G_pp - 2 G_pq + G_qq), clamped at zero.
double mmd_distance(const TransitionDistribution& p, const TransitionDistribution& q,
                    const Kernel& kernel);

struct ContinuousFactorization {
  std::vector<TransitionDistribution> transitions;  // k recovered dict mixtures
  StochasticMatrix coords;   // dictionary coordinates, D x k
  StochasticMatrix Pi;       // k x m
  double objective = 0.0;    // det of the embedded Gram of the recovered mixtures
  double residual = 0.0;     // ||W - C Pi||_F in dictionary coordinates
  int effective_rank = 0;    // embedded rank of the observables
  int restarts_used = 0;
  bool converged = false;
};

// Minimum Gram-determinant factorization of observable dictionary mixtures:
// finds k mixtures over the shared dictionary and a column-stochastic Pi with
// observables = mixtures * Pi, minimizing det of the embedded Gram. With the
// finite-delta atom dictionary this is the finite solver on the same data.
ContinuousFactorization continuous_minvol_factorize(
    const std::vector<TransitionDistribution>& observables, int k,
    const SolverOptions& opts);

}  // namespace latentact
