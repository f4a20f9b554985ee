#include "latentact/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace latentact {

namespace {

using TD = TransitionDistribution;

[[noreturn]] void incompatible(const TD& p, const TD& q, const Kernel& kernel) {
  std::ostringstream msg;
  msg << "mean_embedding_inner: incompatible pairing " << p.kind_name() << " x "
      << q.kind_name() << " under "
      << (kernel.kind == Kernel::Kind::kGaussian ? "gaussian" : "finite-delta")
      << " kernel";
  throw std::invalid_argument(msg.str());
}

double gaussian_pair_inner(const Eigen::VectorXd& mu_p, double var_p,
                           const Eigen::VectorXd& mu_q, double var_q,
                           const Kernel& kernel) {
  if (mu_p.size() != mu_q.size() || int(mu_p.size()) != kernel.dimension) {
    throw std::invalid_argument(
        "mean_embedding_inner: gaussian dimension does not match kernel");
  }
  const double h2 = kernel.bandwidth * kernel.bandwidth;
  const double s2 = h2 + var_p + var_q;
  const double d = double(mu_p.size());
  return std::pow(h2 / s2, 0.5 * d) *
         std::exp(-(mu_p - mu_q).squaredNorm() / (2.0 * s2));
}

void check_dict_kernel(const TD& p, const Kernel& kernel) {
  if (!(p.dictionary()->kernel() == kernel)) {
    throw std::invalid_argument(
        "mean_embedding_inner: dictionary mismatch (dictionary kernel differs "
        "from the requested kernel)");
  }
}

}  // namespace

ComponentDictionary::ComponentDictionary(std::vector<TransitionDistribution> components,
                                         Kernel kernel)
    : components_(std::move(components)), kernel_(kernel) {
  if (components_.empty()) {
    throw std::invalid_argument("ComponentDictionary: no components");
  }
  for (const auto& c : components_) {
    if (c.kind() == TD::Kind::kDictMixture) {
      throw std::invalid_argument(
          "ComponentDictionary: components must be elementary laws");
    }
  }
  gram_ = gram_matrix(components_, kernel_);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_);
  if (es.eigenvalues().minCoeff() < -1e-9) {
    throw std::invalid_argument(
        "ComponentDictionary: component Gram is not positive semidefinite");
  }
}

const TransitionDistribution& ComponentDictionary::component(int i) const {
  if (i < 0 || i >= size()) {
    throw std::out_of_range("ComponentDictionary: component index out of range");
  }
  return components_[std::size_t(i)];
}

std::shared_ptr<const ComponentDictionary> ComponentDictionary::MakeGaussian(
    const std::vector<Eigen::VectorXd>& means, double variance, double bandwidth) {
  if (means.empty()) {
    throw std::invalid_argument("ComponentDictionary: no component means");
  }
  const int d = int(means.front().size());
  const double h = bandwidth > 0.0 ? bandwidth : median_heuristic_bandwidth(means);
  std::vector<TransitionDistribution> comps;
  comps.reserve(means.size());
  for (const auto& mu : means) {
    comps.push_back(TransitionDistribution::Gaussian(mu, variance));
  }
  return std::make_shared<const ComponentDictionary>(std::move(comps),
                                                     Kernel::Gaussian(h, d));
}

std::shared_ptr<const ComponentDictionary> ComponentDictionary::MakeCategoricalAtoms(
    int n) {
  std::vector<TransitionDistribution> comps;
  comps.reserve(std::size_t(n));
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    w(i) = 1.0;
    comps.push_back(TransitionDistribution::Categorical(std::move(w)));
  }
  return std::make_shared<const ComponentDictionary>(std::move(comps),
                                                     Kernel::FiniteDelta(n));
}

double median_heuristic_bandwidth(const std::vector<Eigen::VectorXd>& points) {
  std::vector<double> dists;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      dists.push_back((points[i] - points[j]).norm());
    }
  }
  if (dists.empty()) return 1.0;
  std::sort(dists.begin(), dists.end());
  const double median = dists[dists.size() / 2];
  return median > 0.0 ? median : 1.0;
}

double mean_embedding_inner(const TD& p, const TD& q, const Kernel& kernel) {
  // Mixtures expand by linearity of the embedding.
  if (p.kind() == TD::Kind::kDictMixture) {
    check_dict_kernel(p, kernel);
    if (q.kind() == TD::Kind::kDictMixture && q.dictionary() == p.dictionary()) {
      return p.weights().dot(p.dictionary()->gram() * q.weights());
    }
    double acc = 0.0;
    for (int i = 0; i < p.dictionary()->size(); ++i) {
      if (p.weights()(i) == 0.0) continue;
      acc += p.weights()(i) *
             mean_embedding_inner(p.dictionary()->component(i), q, kernel);
    }
    return acc;
  }
  if (q.kind() == TD::Kind::kDictMixture) return mean_embedding_inner(q, p, kernel);

  switch (p.kind()) {
    case TD::Kind::kCategorical: {
      if (kernel.kind != Kernel::Kind::kFiniteDelta ||
          q.kind() != TD::Kind::kCategorical) {
        incompatible(p, q, kernel);
      }
      if (p.weights().size() != q.weights().size() ||
          int(p.weights().size()) != kernel.dimension) {
        throw std::invalid_argument(
            "mean_embedding_inner: categorical sizes do not match kernel");
      }
      return p.weights().dot(q.weights());
    }
    case TD::Kind::kGaussian: {
      if (kernel.kind != Kernel::Kind::kGaussian) incompatible(p, q, kernel);
      if (q.kind() == TD::Kind::kGaussian) {
        return gaussian_pair_inner(p.mean(), p.variance(), q.mean(), q.variance(),
                                   kernel);
      }
      if (q.kind() == TD::Kind::kEmpirical) {
        double acc = 0.0;
        for (const auto& y : q.points()) {
          acc += gaussian_pair_inner(p.mean(), p.variance(), y, 0.0, kernel);
        }
        return acc / double(q.points().size());
      }
      incompatible(p, q, kernel);
    }
    case TD::Kind::kEmpirical: {
      if (kernel.kind != Kernel::Kind::kGaussian) incompatible(p, q, kernel);
      if (q.kind() == TD::Kind::kGaussian) return mean_embedding_inner(q, p, kernel);
      if (q.kind() == TD::Kind::kEmpirical) {
        double acc = 0.0;
        for (const auto& x : p.points()) {
          for (const auto& y : q.points()) {
            acc += kernel.evaluate(x, y);
          }
        }
        return acc / double(p.points().size() * q.points().size());
      }
      incompatible(p, q, kernel);
    }
    case TD::Kind::kDictMixture:
      break;  // handled above
  }
  throw std::logic_error("mean_embedding_inner: unreachable");
}

Eigen::MatrixXd gram_matrix(const std::vector<TransitionDistribution>& dists,
                            const Kernel& kernel) {
  const int n = int(dists.size());
  if (n == 0) throw std::invalid_argument("gram_matrix: no distributions");
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double v = mean_embedding_inner(dists[std::size_t(i)],
                                            dists[std::size_t(j)], kernel);
      G(i, j) = v;
      G(j, i) = v;
    }
  }
  return G;
}

int embedded_rank(const std::vector<TransitionDistribution>& dists,
                  const Kernel& kernel, double tol) {
  const Eigen::MatrixXd G = gram_matrix(dists, kernel);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  const double top = es.eigenvalues().maxCoeff();
  if (top <= 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) > tol * top) ++rank;
  }
  return rank;
}

double mmd_distance(const TransitionDistribution& p, const TransitionDistribution& q,
                    const Kernel& kernel) {
  const double pp = mean_embedding_inner(p, p, kernel);
  const double qq = mean_embedding_inner(q, q, kernel);
  const double pq = mean_embedding_inner(p, q, kernel);
  return std::sqrt(std::max(0.0, pp - 2.0 * pq + qq));
}

ContinuousFactorization continuous_minvol_factorize(
    const std::vector<TransitionDistribution>& observables, int k,
    const SolverOptions& opts) {
  if (observables.empty()) {
    throw std::invalid_argument("continuous_minvol_factorize: no observables");
  }
  std::shared_ptr<const ComponentDictionary> dict;
  for (const auto& obs : observables) {
    if (obs.kind() != TransitionDistribution::Kind::kDictMixture) {
      throw std::invalid_argument(
          "continuous_minvol_factorize: observables must be dictionary mixtures");
    }
    if (!dict) {
      dict = obs.dictionary();
    } else if (dict != obs.dictionary()) {
      throw std::invalid_argument(
          "continuous_minvol_factorize: observables use mismatched dictionaries");
    }
  }
  const int m = int(observables.size());
  if (m < k) {
    throw std::invalid_argument(
        "continuous_minvol_factorize: need at least k observables");
  }

  const int D = dict->size();
  Eigen::MatrixXd W(D, m);
  for (int e = 0; e < m; ++e) W.col(e) = observables[std::size_t(e)].weights();

  SolverOptions local = opts;
  local.k = k;
  FactorizationResult fact = minvol_factorize_metric(W, dict->gram(), local);

  ContinuousFactorization out;
  out.coords = fact.T;
  out.Pi = fact.Pi;
  out.objective = fact.objective;
  out.residual = fact.residual;
  out.effective_rank = fact.effective_rank;
  out.restarts_used = fact.restarts_used;
  out.converged = fact.converged;
  out.transitions.reserve(std::size_t(fact.solved_k));
  for (int a = 0; a < fact.solved_k; ++a) {
    out.transitions.push_back(
        TransitionDistribution::DictMixture(dict, fact.T.col(a)));
  }
  return out;
}

}  // namespace latentact
