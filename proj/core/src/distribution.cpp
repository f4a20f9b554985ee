#include "latentact/distribution.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "latentact/embedding.hpp"

namespace latentact {

namespace {

void check_weights(const Eigen::VectorXd& w, const char* what) {
  if (w.size() == 0) {
    throw std::invalid_argument(std::string(what) + ": empty weight vector");
  }
  if (w.minCoeff() < -1e-12) {
    throw std::invalid_argument(std::string(what) + ": negative weight");
  }
  const double dev = std::abs(w.sum() - 1.0);
  if (dev > 1e-10) {
    std::ostringstream msg;
    msg << what << ": weights sum to 1 within 1e-10 required, deviation " << dev;
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

Kernel Kernel::Gaussian(double bandwidth, int dimension) {
  if (bandwidth <= 0.0) throw std::invalid_argument("Kernel: bandwidth must be > 0");
  if (dimension < 1) throw std::invalid_argument("Kernel: dimension must be >= 1");
  Kernel k;
  k.kind = Kind::kGaussian;
  k.bandwidth = bandwidth;
  k.dimension = dimension;
  return k;
}

Kernel Kernel::FiniteDelta(int size) {
  if (size < 1) throw std::invalid_argument("Kernel: finite space size must be >= 1");
  Kernel k;
  k.kind = Kind::kFiniteDelta;
  k.dimension = size;
  return k;
}

double Kernel::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& y) const {
  if (kind != Kind::kGaussian) {
    throw std::invalid_argument("Kernel::evaluate: pointwise evaluation requires a gaussian kernel");
  }
  const double h2 = bandwidth * bandwidth;
  return std::exp(-(x - y).squaredNorm() / (2.0 * h2));
}

bool Kernel::operator==(const Kernel& other) const {
  return kind == other.kind && bandwidth == other.bandwidth &&
         dimension == other.dimension;
}

TransitionDistribution TransitionDistribution::Categorical(Eigen::VectorXd weights) {
  check_weights(weights, "TransitionDistribution::Categorical");
  TransitionDistribution d;
  d.kind_ = Kind::kCategorical;
  d.weights_ = std::move(weights);
  d.weights_ = d.weights_.cwiseMax(0.0);
  return d;
}

TransitionDistribution TransitionDistribution::Gaussian(Eigen::VectorXd mean,
                                                        double variance) {
  if (variance < 0.0) {
    throw std::invalid_argument("TransitionDistribution::Gaussian: variance must be >= 0");
  }
  TransitionDistribution d;
  d.kind_ = Kind::kGaussian;
  d.mean_ = std::move(mean);
  d.variance_ = variance;
  return d;
}

TransitionDistribution TransitionDistribution::Dirac(Eigen::VectorXd point) {
  return Gaussian(std::move(point), 0.0);
}

TransitionDistribution TransitionDistribution::DictMixture(
    std::shared_ptr<const ComponentDictionary> dict, Eigen::VectorXd weights) {
  if (!dict) {
    throw std::invalid_argument("TransitionDistribution::DictMixture: null dictionary");
  }
  check_weights(weights, "TransitionDistribution::DictMixture");
  if (weights.size() != dict->size()) {
    throw std::invalid_argument(
        "TransitionDistribution::DictMixture: weight count does not match dictionary size");
  }
  TransitionDistribution d;
  d.kind_ = Kind::kDictMixture;
  d.dict_ = std::move(dict);
  d.weights_ = weights.cwiseMax(0.0);
  return d;
}

TransitionDistribution TransitionDistribution::Empirical(
    std::vector<Eigen::VectorXd> points) {
  if (points.empty()) {
    throw std::invalid_argument("TransitionDistribution::Empirical: no points");
  }
  TransitionDistribution d;
  d.kind_ = Kind::kEmpirical;
  d.points_ = std::move(points);
  return d;
}

Eigen::VectorXd TransitionDistribution::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::kCategorical:
      throw std::invalid_argument(
          "TransitionDistribution::sample: categorical laws sample indices");
    case Kind::kGaussian: {
      if (variance_ == 0.0) return mean_;
      const double sigma = std::sqrt(variance_);
      return mean_ + sigma * rng.normal_vector(mean_.size());
    }
    case Kind::kDictMixture: {
      const Eigen::Index c = rng.categorical(weights_);
      return dict_->component(static_cast<int>(c)).sample(rng);
    }
    case Kind::kEmpirical: {
      const auto i = rng.uniform_index(points_.size());
      return points_[static_cast<std::size_t>(i)];
    }
  }
  throw std::logic_error("TransitionDistribution::sample: unknown kind");
}

int TransitionDistribution::sample_index(Rng& rng) const {
  if (kind_ != Kind::kCategorical) {
    throw std::invalid_argument(
        "TransitionDistribution::sample_index: not a categorical law");
  }
  return static_cast<int>(rng.categorical(weights_));
}

std::string TransitionDistribution::kind_name() const {
  switch (kind_) {
    case Kind::kCategorical: return "categorical";
    case Kind::kGaussian: return variance_ == 0.0 ? "dirac" : "gaussian";
    case Kind::kDictMixture: return "dict_mixture";
    case Kind::kEmpirical: return "empirical";
  }
  return "unknown";
}

}  // namespace latentact
