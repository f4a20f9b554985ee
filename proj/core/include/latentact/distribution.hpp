#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "latentact/rng.hpp"

namespace latentact {

class ComponentDictionary;

// Embedding kernel. The gaussian kernel k(x,y) = exp(-||x-y||^2 / (2 h^2)) is
// characteristic on R^d; the finite-delta kernel is the identity embedding of
// probability vectors on a finite space.
struct Kernel {
  enum class Kind { kGaussian, kFiniteDelta };

  Kind kind = Kind::kFiniteDelta;
  double bandwidth = 1.0;  // gaussian only, > 0
  int dimension = 0;       // gaussian: point dimension d; finite-delta: space size n

  static Kernel Gaussian(double bandwidth, int dimension);
  static Kernel FiniteDelta(int size);

  double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& y) const;

  bool operator==(const Kernel& other) const;
};

// Tagged representation of a next-observation law. Dirac masses are stored as
// zero-variance gaussians so they share the gaussian closed forms.
class TransitionDistribution {
 public:
  enum class Kind { kCategorical, kGaussian, kDictMixture, kEmpirical };

  static TransitionDistribution Categorical(Eigen::VectorXd weights);
  static TransitionDistribution Gaussian(Eigen::VectorXd mean, double variance);
  static TransitionDistribution Dirac(Eigen::VectorXd point);
  static TransitionDistribution DictMixture(
      std::shared_ptr<const ComponentDictionary> dict, Eigen::VectorXd weights);
  static TransitionDistribution Empirical(std::vector<Eigen::VectorXd> points);

  Kind kind() const { return kind_; }
  bool is_dirac() const { return kind_ == Kind::kGaussian && variance_ == 0.0; }

  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  double variance() const { return variance_; }
  const std::vector<Eigen::VectorXd>& points() const { return points_; }
  const std::shared_ptr<const ComponentDictionary>& dictionary() const {
    return dict_;
  }

  // Draws one realization as a point in the observation space. Categorical
  // draws use sample_index instead; calling sample on a categorical throws.
  Eigen::VectorXd sample(Rng& rng) const;
  int sample_index(Rng& rng) const;  // categorical only

  std::string kind_name() const;

 private:
  TransitionDistribution() = default;

  Kind kind_ = Kind::kCategorical;
  Eigen::VectorXd weights_;  // categorical / dict mixture
  Eigen::VectorXd mean_;     // gaussian
  double variance_ = 0.0;    // gaussian (0 = dirac)
  std::vector<Eigen::VectorXd> points_;  // empirical
  std::shared_ptr<const ComponentDictionary> dict_;
};

}  // namespace latentact
