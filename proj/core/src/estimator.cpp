#include "latentact/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "latentact/embedding.hpp"
#include "latentact/minvol.hpp"
#include "latentact/numeric.hpp"
#include "latentact/rng.hpp"

namespace latentact {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDensityFloor = 1e-300;

Eigen::MatrixXd column_softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double shift = logits.col(c).maxCoeff();
    Eigen::VectorXd e = (logits.col(c).array() - shift).exp();
    out.col(c) = e / e.sum();
  }
  return out;
}

// Chain rule through a column softmax: given dL/dp, returns dL/dz.
Eigen::MatrixXd softmax_backprop(const Eigen::MatrixXd& probs,
                                 const Eigen::MatrixXd& dprobs) {
  Eigen::MatrixXd out(probs.rows(), probs.cols());
  for (Eigen::Index c = 0; c < probs.cols(); ++c) {
    const double inner = probs.col(c).dot(dprobs.col(c));
    out.col(c) =
        probs.col(c).cwiseProduct(dprobs.col(c) - Eigen::VectorXd::Constant(
                                                      probs.rows(), inner));
  }
  return out;
}

struct TabularData {
  std::vector<Eigen::MatrixXd> counts;  // [state] n x m over (o', e)
  std::vector<double> state_weight;     // N_s / N
  double total = 0.0;
};

TabularData group_tabular(const TrajectoryBatch& data, const ModelShape& shape) {
  TabularData g;
  g.counts.assign(std::size_t(shape.num_states),
                  Eigen::MatrixXd::Zero(shape.n_next, shape.m));
  g.state_weight.assign(std::size_t(shape.num_states), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int s = data.state[i];
    const int e = data.demonstrator[i];
    const int next = data.next_state[i];
    if (s < 0 || s >= shape.num_states || e < 0 || e >= shape.m || next < 0 ||
        next >= shape.n_next) {
      throw std::invalid_argument("estimator: data triple out of range");
    }
    g.counts[std::size_t(s)](next, e) += 1.0;
    g.state_weight[std::size_t(s)] += 1.0;
    g.total += 1.0;
  }
  if (g.total > 0.0) {
    for (auto& w : g.state_weight) w /= g.total;
  }
  return g;
}

std::vector<double> state_weights_from_states(const std::vector<int>& states,
                                              int num_states) {
  std::vector<double> w(std::size_t(num_states), 0.0);
  for (int s : states) {
    if (s < 0 || s >= num_states) {
      throw std::invalid_argument("estimator: data state out of range");
    }
    w[std::size_t(s)] += 1.0;
  }
  for (auto& x : w) x /= double(states.size());
  return w;
}

double policy_gram_logdet(const Eigen::MatrixXd& pi, double eps) {
  const int k = int(pi.rows());
  const Eigen::MatrixXd g =
      pi * pi.transpose() + eps * Eigen::MatrixXd::Identity(k, k);
  return std::log(std::max(g.determinant(), kDensityFloor));
}

struct ObjectiveParts {
  double fit = 0.0, vol = 0.0, pol = 0.0, anchor = 0.0;
  double total(const HyperParams& h) const {
    return fit + h.lambda_vol * vol + h.lambda_pol * pol +
           h.lambda_anchor * anchor;
  }
};

// Shared evaluator; returns parts with fit = +inf on underflow. Gradients are
// accumulated only when grads != nullptr and the objective is finite.
ObjectiveParts evaluate_objective(const TransitionParams& theta,
                                  const PolicyParams& psi,
                                  const TrajectoryBatch& data,
                                  const AnchorDataset& anchors,
                                  const HyperParams& hyper, Gradients* grads,
                                  std::string* underflow_triple) {
  const int S = psi.num_states();
  const int k = psi.k;
  if (S < 1 || theta.num_states() != S) {
    throw std::invalid_argument("estimator: policy/transition state counts differ");
  }
  const Eigen::Index action_cols =
      theta.kind == TransitionParams::Kind::kTabular
          ? theta.logits.front().cols()
          : theta.means.front().cols();
  if (action_cols != k || psi.logits.front().rows() != k ||
      psi.logits.front().cols() != psi.m) {
    throw std::invalid_argument("estimator: parameter shapes do not agree on k");
  }
  ObjectiveParts parts;

  if (grads) {
    grads->policy.assign(std::size_t(S), Eigen::MatrixXd());
    grads->transition.assign(std::size_t(S), Eigen::MatrixXd());
    grads->log_sigma = 0.0;
  }

  std::vector<Eigen::MatrixXd> pi_probs(static_cast<std::size_t>(S));
  std::vector<Eigen::MatrixXd> dpi(static_cast<std::size_t>(S));
  for (int s = 0; s < S; ++s) {
    pi_probs[std::size_t(s)] = psi.policy(s);
    dpi[std::size_t(s)] =
        Eigen::MatrixXd::Zero(pi_probs[std::size_t(s)].rows(),
                              pi_probs[std::size_t(s)].cols());
  }

  const double N = double(data.size());
  std::vector<double> state_weight(std::size_t(S), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    state_weight[std::size_t(data.state[i])] += 1.0 / N;
  }

  if (theta.kind == TransitionParams::Kind::kTabular) {
    ModelShape shape;
    shape.num_states = S;
    shape.k = k;
    shape.m = psi.m;
    shape.n_next = int(theta.logits.front().rows());
    const TabularData grouped = group_tabular(data, shape);

    for (int s = 0; s < S; ++s) {
      const Eigen::MatrixXd T = theta.transition(s);
      const Eigen::MatrixXd& Pi = pi_probs[std::size_t(s)];
      const Eigen::MatrixXd& C = grouped.counts[std::size_t(s)];
      const double w = grouped.state_weight[std::size_t(s)];
      Eigen::MatrixXd dT = Eigen::MatrixXd::Zero(T.rows(), T.cols());

      if (C.sum() > 0.0) {
        const Eigen::MatrixXd Q = T * Pi;
        for (Eigen::Index e = 0; e < C.cols(); ++e) {
          for (Eigen::Index o = 0; o < C.rows(); ++o) {
            if (C(o, e) == 0.0) continue;
            if (Q(o, e) < kDensityFloor) {
              if (underflow_triple) {
                std::ostringstream msg;
                msg << "(o=" << s << ", o'=" << o << ", e=" << e << ")";
                *underflow_triple = msg.str();
              }
              parts.fit = std::numeric_limits<double>::infinity();
              return parts;
            }
            parts.fit -= C(o, e) / N * std::log(Q(o, e));
          }
        }
        if (grads) {
          Eigen::MatrixXd R = Eigen::MatrixXd::Zero(C.rows(), C.cols());
          for (Eigen::Index e = 0; e < C.cols(); ++e) {
            for (Eigen::Index o = 0; o < C.rows(); ++o) {
              if (C(o, e) > 0.0) R(o, e) = -(C(o, e) / N) / Q(o, e);
            }
          }
          dT += R * Pi.transpose();
          dpi[std::size_t(s)] += T.transpose() * R;
        }
      }

      // Volume term: finite-delta Gram is T^T T.
      if (hyper.lambda_vol != 0.0 && w > 0.0) {
        const Eigen::MatrixXd G =
            T.transpose() * T + hyper.eps * Eigen::MatrixXd::Identity(k, k);
        parts.vol += w * std::log(std::max(G.determinant(), kDensityFloor));
        if (grads) {
          const Eigen::MatrixXd M = G.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
          dT += hyper.lambda_vol * w * 2.0 * T * M;
        }
      }

      if (grads) {
        grads->transition[std::size_t(s)] = softmax_backprop(T, dT);
      }
    }
  } else {
    // Gaussian head.
    if (data.next_point.size() != data.size()) {
      throw std::invalid_argument(
          "estimator: gaussian head requires continuous next points");
    }
    const double sigma2 = theta.sigma() * theta.sigma();
    const int d = int(theta.means.front().rows());
    const double log_norm = -0.5 * double(d) * std::log(2.0 * kPi * sigma2);
    if (grads) {
      for (int s = 0; s < S; ++s) {
        grads->transition[std::size_t(s)] =
            Eigen::MatrixXd::Zero(d, k);
      }
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      const int s = data.state[i];
      const int e = data.demonstrator[i];
      const Eigen::VectorXd& x = data.next_point[i];
      const Eigen::MatrixXd& mu = theta.means[std::size_t(s)];
      const Eigen::MatrixXd& Pi = pi_probs[std::size_t(s)];

      Eigen::VectorXd log_terms(k);
      Eigen::VectorXd r2(k);
      for (int a = 0; a < k; ++a) {
        r2(a) = (x - mu.col(a)).squaredNorm();
        log_terms(a) = std::log(std::max(Pi(a, e), kDensityFloor)) + log_norm -
                       r2(a) / (2.0 * sigma2);
      }
      const double shift = log_terms.maxCoeff();
      const double sum_exp = (log_terms.array() - shift).exp().sum();
      const double log_q = shift + std::log(sum_exp);
      if (!std::isfinite(log_q) || log_q < std::log(kDensityFloor)) {
        if (underflow_triple) {
          std::ostringstream msg;
          msg << "(o=" << s << ", sample " << i << ", e=" << e << ")";
          *underflow_triple = msg.str();
        }
        parts.fit = std::numeric_limits<double>::infinity();
        return parts;
      }
      parts.fit -= log_q / N;
      if (grads) {
        for (int a = 0; a < k; ++a) {
          const double gamma = std::exp(log_terms(a) - log_q);
          grads->transition[std::size_t(s)].col(a) +=
              -(1.0 / N) * gamma * (x - mu.col(a)) / sigma2;
          grads->log_sigma +=
              -(1.0 / N) * gamma * (-double(d) + r2(a) / sigma2);
          // d log q / d Pi(a,e) = phi_a / q = gamma / Pi(a,e).
          dpi[std::size_t(s)](a, e) +=
              -(1.0 / N) * gamma / std::max(Pi(a, e), kDensityFloor);
        }
      }
    }

    if (hyper.lambda_vol != 0.0) {
      if (hyper.kernel.kind != Kernel::Kind::kGaussian) {
        throw std::invalid_argument(
            "estimator: gaussian-head volume term requires a gaussian kernel");
      }
      const double h2 = hyper.kernel.bandwidth * hyper.kernel.bandwidth;
      const double beta = h2 + 2.0 * sigma2;
      for (int s = 0; s < S; ++s) {
        const double w = state_weight[std::size_t(s)];
        if (w == 0.0) continue;
        const Eigen::MatrixXd& mu = theta.means[std::size_t(s)];
        Eigen::MatrixXd G(k, k);
        Eigen::MatrixXd D(k, k);
        for (int a = 0; a < k; ++a) {
          for (int b = 0; b < k; ++b) {
            D(a, b) = (mu.col(a) - mu.col(b)).squaredNorm();
            G(a, b) = std::pow(h2 / beta, 0.5 * double(d)) *
                      std::exp(-D(a, b) / (2.0 * beta));
          }
        }
        const Eigen::MatrixXd Geps =
            G + hyper.eps * Eigen::MatrixXd::Identity(k, k);
        parts.vol += w * std::log(std::max(Geps.determinant(), kDensityFloor));
        if (grads) {
          const Eigen::MatrixXd M =
              Geps.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
          for (int a = 0; a < k; ++a) {
            for (int b = 0; b < k; ++b) {
              if (b == a) continue;
              grads->transition[std::size_t(s)].col(a) +=
                  hyper.lambda_vol * w * 2.0 * M(a, b) * (-G(a, b) / beta) *
                  (mu.col(a) - mu.col(b));
            }
          }
          double dbeta = 0.0;
          for (int a = 0; a < k; ++a) {
            for (int b = 0; b < k; ++b) {
              dbeta += M(a, b) * G(a, b) *
                       (-0.5 * double(d) / beta + D(a, b) / (2.0 * beta * beta));
            }
          }
          grads->log_sigma += hyper.lambda_vol * w * dbeta * 4.0 * sigma2;
        }
      }
    }
  }

  // Policy diversity barrier, common to both parameterizations.
  if (hyper.lambda_pol != 0.0) {
    for (int s = 0; s < S; ++s) {
      const double w = state_weight[std::size_t(s)];
      if (w == 0.0) continue;
      const Eigen::MatrixXd& Pi = pi_probs[std::size_t(s)];
      const double v = policy_gram_logdet(Pi, hyper.eps);
      if (v < hyper.tau) {
        parts.pol += w * (hyper.tau - v);
        if (grads) {
          const Eigen::MatrixXd H =
              (Pi * Pi.transpose() + hyper.eps * Eigen::MatrixXd::Identity(k, k))
                  .ldlt()
                  .solve(Eigen::MatrixXd::Identity(k, k));
          dpi[std::size_t(s)] += hyper.lambda_pol * w * (-2.0) * H * Pi;
        }
      }
    }
  }

  if (hyper.lambda_anchor != 0.0) {
    if (anchors.size() == 0) {
      throw std::invalid_argument(
          "estimator: empty anchor dataset with positive anchor weight");
    }
    const double r = double(anchors.size());
    for (std::size_t j = 0; j < anchors.size(); ++j) {
      const int s = anchors.state[j];
      const int e = anchors.demonstrator[j];
      const int a = anchors.action[j];
      if (s < 0 || s >= S || e < 0 || e >= psi.m || a < 0 || a >= k) {
        throw std::invalid_argument("estimator: anchor triple out of range");
      }
      const double p = std::max(pi_probs[std::size_t(s)](a, e), kDensityFloor);
      parts.anchor -= std::log(p) / r;
      if (grads) {
        dpi[std::size_t(s)](a, e) += hyper.lambda_anchor * (-1.0 / r) / p;
      }
    }
  }

  if (grads) {
    for (int s = 0; s < S; ++s) {
      grads->policy[std::size_t(s)] =
          softmax_backprop(pi_probs[std::size_t(s)], dpi[std::size_t(s)]);
    }
  }
  return parts;
}

}  // namespace

Eigen::MatrixXd PolicyParams::policy(int state) const {
  return column_softmax(logits[std::size_t(state)]);
}

Eigen::MatrixXd TransitionParams::transition(int state) const {
  if (kind != Kind::kTabular) {
    throw std::invalid_argument(
        "TransitionParams::transition: tabular parameterization required");
  }
  return column_softmax(logits[std::size_t(state)]);
}

double TransitionParams::sigma() const { return std::exp(log_sigma); }

HyperParams HyperParams::Defaults(int k) {
  HyperParams h;
  h.tau = double(k) * std::log(1.0 / double(k)) - 1.0;
  return h;
}

void HyperParams::validate() const {
  if (lambda_vol < 0.0 || lambda_pol < 0.0 || lambda_anchor < 0.0) {
    throw std::invalid_argument("HyperParams: lambdas must be >= 0");
  }
  if (eps <= 0.0) throw std::invalid_argument("HyperParams: eps must be > 0");
  if (step_size <= 0.0) {
    throw std::invalid_argument("HyperParams: step size must be > 0");
  }
  if (budget < 0) throw std::invalid_argument("HyperParams: budget must be >= 0");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw std::invalid_argument("HyperParams: backtrack factor must be in (0,1)");
  }
}

double nll_fit(const TransitionParams& theta, const PolicyParams& psi,
               const TrajectoryBatch& data) {
  if (data.size() == 0) throw std::invalid_argument("nll_fit: empty data");
  HyperParams inert;
  inert.lambda_vol = 0.0;
  inert.lambda_pol = 0.0;
  inert.lambda_anchor = 0.0;
  std::string triple;
  const ObjectiveParts parts = evaluate_objective(
      theta, psi, data, AnchorDataset{}, inert, nullptr, &triple);
  if (!std::isfinite(parts.fit)) {
    throw std::runtime_error("nll_fit: zero mixture density at sample " + triple);
  }
  return parts.fit;
}

double reg_vol(const TransitionParams& theta, const std::vector<int>& data_states,
               const Kernel& kernel, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("reg_vol: eps must be > 0");
  if (data_states.empty()) throw std::invalid_argument("reg_vol: no data states");
  const auto weights = state_weights_from_states(data_states, theta.num_states());

  double value = 0.0;
  for (int s = 0; s < theta.num_states(); ++s) {
    const double w = weights[std::size_t(s)];
    if (w == 0.0) continue;
    std::vector<TransitionDistribution> dists;
    if (theta.kind == TransitionParams::Kind::kTabular) {
      const Eigen::MatrixXd T = theta.transition(s);
      for (Eigen::Index a = 0; a < T.cols(); ++a) {
        dists.push_back(TransitionDistribution::Categorical(T.col(a)));
      }
    } else {
      const Eigen::MatrixXd& mu = theta.means[std::size_t(s)];
      for (Eigen::Index a = 0; a < mu.cols(); ++a) {
        dists.push_back(TransitionDistribution::Gaussian(
            mu.col(a), theta.sigma() * theta.sigma()));
      }
    }
    const Eigen::MatrixXd G = gram_matrix(dists, kernel);
    const Eigen::MatrixXd Geps =
        G + eps * Eigen::MatrixXd::Identity(G.rows(), G.cols());
    const double det = Geps.determinant();
    if (!(det > 0.0)) {
      throw std::runtime_error("reg_vol: Gram determinant not positive");
    }
    value += w * std::log(det);
  }
  return value;
}

double reg_pol(const PolicyParams& psi, const std::vector<int>& data_states,
               double eps, double tau) {
  if (eps <= 0.0) throw std::invalid_argument("reg_pol: eps must be > 0");
  if (data_states.empty()) throw std::invalid_argument("reg_pol: no data states");
  const auto weights = state_weights_from_states(data_states, psi.num_states());
  double value = 0.0;
  for (int s = 0; s < psi.num_states(); ++s) {
    const double w = weights[std::size_t(s)];
    if (w == 0.0) continue;
    const double v = policy_gram_logdet(psi.policy(s), eps);
    value += w * std::max(tau - v, 0.0);
  }
  return value;
}

double anchor_loss(const PolicyParams& psi, const AnchorDataset& anchors) {
  if (anchors.size() == 0) {
    throw std::invalid_argument("anchor_loss: empty anchor dataset");
  }
  double value = 0.0;
  for (std::size_t j = 0; j < anchors.size(); ++j) {
    if (anchors.state[j] < 0 || anchors.state[j] >= psi.num_states() ||
        anchors.demonstrator[j] < 0 || anchors.demonstrator[j] >= psi.m ||
        anchors.action[j] < 0 || anchors.action[j] >= psi.k) {
      throw std::invalid_argument("anchor_loss: anchor triple out of range");
    }
    const Eigen::MatrixXd pi = psi.policy(anchors.state[j]);
    const double p =
        std::max(pi(anchors.action[j], anchors.demonstrator[j]), kDensityFloor);
    value -= std::log(p) / double(anchors.size());
  }
  return value;
}

double total_objective(const TransitionParams& theta, const PolicyParams& psi,
                       const TrajectoryBatch& data, const AnchorDataset& anchors,
                       const HyperParams& hyper, Gradients* grads) {
  hyper.validate();
  if (data.size() == 0) throw std::invalid_argument("total_objective: empty data");
  const ObjectiveParts parts =
      evaluate_objective(theta, psi, data, anchors, hyper, grads, nullptr);
  return parts.total(hyper);
}

std::pair<TransitionParams, PolicyParams> initialize_params(
    const TrajectoryBatch& data, const ModelShape& shape, const HyperParams& hyper) {
  PolicyParams psi;
  psi.k = shape.k;
  psi.m = shape.m;
  for (int s = 0; s < shape.num_states; ++s) {
    Rng rng(derive_seed(hyper.seed, "init-policy", std::uint64_t(s)));
    Eigen::MatrixXd z(shape.k, shape.m);
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      z(i) = hyper.init_noise * rng.uniform(-1.0, 1.0);
    }
    psi.logits.push_back(std::move(z));
  }

  TransitionParams theta;
  theta.kind = shape.kind;
  if (shape.kind == TransitionParams::Kind::kTabular) {
    // Seed each action column from a distinct demonstrator's empirical
    // conditional (observable data only). Starting all columns at the shared
    // marginal sits on the boundary of a merged-component basin that plain
    // gradient descent rarely escapes; distinct in-hull starting points do
    // not have that problem. Laplace smoothing keeps the logits finite.
    std::vector<Eigen::MatrixXd> cond(
        std::size_t(shape.num_states),
        Eigen::MatrixXd::Zero(shape.n_next, shape.m));
    for (std::size_t i = 0; i < data.size(); ++i) {
      cond[std::size_t(data.state[i])](data.next_state[i],
                                       data.demonstrator[i]) += 1.0;
    }
    for (int s = 0; s < shape.num_states; ++s) {
      Rng rng(derive_seed(hyper.seed, "init-transition", std::uint64_t(s)));
      Eigen::MatrixXd z(shape.n_next, shape.k);
      Eigen::MatrixXd smoothed(shape.n_next, shape.m);
      for (int e = 0; e < shape.m; ++e) {
        Eigen::VectorXd col = cond[std::size_t(s)].col(e);
        smoothed.col(e) = (col.array() + 1.0) / (col.sum() + double(shape.n_next));
      }
      Eigen::MatrixXd T0(shape.n_next, shape.k);
      for (int a = 0; a < shape.k; ++a) {
        T0.col(a) = smoothed.col(a % shape.m);
        for (int o = 0; o < shape.n_next; ++o) {
          z(o, a) = std::log(T0(o, a)) + hyper.init_noise * rng.uniform(-1.0, 1.0);
        }
      }
      theta.logits.push_back(std::move(z));

      // Policy logits from the simplex least-squares mixture weights of each
      // demonstrator's conditional against the initial columns; noise-only
      // logits park mixed demonstrators on softmax plateaus near zero mass.
      // The weights are only meaningful when the initial columns are
      // distinguishable, so nearly redundant columns keep the noise init.
      if (shape.k <= 12 && numerical_rank(T0, 0.05) == shape.k) {
        Eigen::MatrixXd pz(shape.k, shape.m);
        for (int e = 0; e < shape.m; ++e) {
          const Eigen::VectorXd w = simplex_least_squares(T0, smoothed.col(e));
          for (int a = 0; a < shape.k; ++a) {
            pz(a, e) = std::log(w(a) + 1e-3) +
                       hyper.init_noise * rng.uniform(-1.0, 1.0);
          }
        }
        psi.logits[std::size_t(s)] = std::move(pz);
      }
    }
  } else {
    std::vector<Eigen::VectorXd> mean_point(
        std::size_t(shape.num_states), Eigen::VectorXd::Zero(shape.dim));
    std::vector<double> count(std::size_t(shape.num_states), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
      mean_point[std::size_t(data.state[i])] += data.next_point[i];
      count[std::size_t(data.state[i])] += 1.0;
    }
    double spread = 0.0;
    for (int s = 0; s < shape.num_states; ++s) {
      if (count[std::size_t(s)] > 0.0) {
        mean_point[std::size_t(s)] /= count[std::size_t(s)];
      }
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      spread += (data.next_point[i] - mean_point[std::size_t(data.state[i])])
                    .squaredNorm();
    }
    spread = std::sqrt(std::max(spread / std::max(1.0, double(data.size())), 1e-4));
    for (int s = 0; s < shape.num_states; ++s) {
      Rng rng(derive_seed(hyper.seed, "init-transition", std::uint64_t(s)));
      Eigen::MatrixXd mu(shape.dim, shape.k);
      for (int a = 0; a < shape.k; ++a) {
        mu.col(a) =
            mean_point[std::size_t(s)] + spread * 0.1 * rng.normal_vector(shape.dim);
      }
      theta.means.push_back(std::move(mu));
    }
    theta.log_sigma = std::log(spread);
  }
  return {std::move(theta), std::move(psi)};
}

TrainResult train(const TrajectoryBatch& data, const AnchorDataset& anchors,
                  const ModelShape& shape, const HyperParams& hyper) {
  hyper.validate();
  if (data.size() == 0) throw std::invalid_argument("train: empty data");
  if (hyper.lambda_anchor > 0.0 && anchors.size() == 0) {
    throw std::invalid_argument("train: anchors required when lambda_anchor > 0");
  }

  TrainResult result;
  auto [theta, psi] = initialize_params(data, shape, hyper);
  result.theta = std::move(theta);
  result.psi = std::move(psi);

  Gradients grads;
  ObjectiveParts parts = evaluate_objective(result.theta, result.psi, data,
                                            anchors, hyper, &grads, nullptr);
  double f = parts.total(hyper);
  if (!std::isfinite(f)) {
    result.report.diverged = true;
    result.report.final_objective = f;
    return result;
  }

  double eta = hyper.step_size;
  const double eta_cap = hyper.step_size * 64.0;
  int evaluations = 0;
  const int max_evaluations = std::max(64, 24 * hyper.budget);

  while (result.report.accepted_steps < hyper.budget &&
         evaluations < max_evaluations && eta > 1e-16) {
    TransitionParams theta_trial = result.theta;
    PolicyParams psi_trial = result.psi;
    for (int s = 0; s < shape.num_states; ++s) {
      psi_trial.logits[std::size_t(s)] -= eta * grads.policy[std::size_t(s)];
      if (shape.kind == TransitionParams::Kind::kTabular) {
        theta_trial.logits[std::size_t(s)] -=
            eta * grads.transition[std::size_t(s)];
      } else {
        theta_trial.means[std::size_t(s)] -=
            eta * grads.transition[std::size_t(s)];
      }
    }
    if (shape.kind == TransitionParams::Kind::kGaussianHead) {
      theta_trial.log_sigma -= eta * grads.log_sigma;
    }

    Gradients trial_grads;
    const ObjectiveParts trial_parts = evaluate_objective(
        theta_trial, psi_trial, data, anchors, hyper, &trial_grads, nullptr);
    const double f_trial = trial_parts.total(hyper);
    ++evaluations;

    if (std::isfinite(f_trial) && f_trial <= f) {
      result.theta = std::move(theta_trial);
      result.psi = std::move(psi_trial);
      grads = std::move(trial_grads);
      parts = trial_parts;
      f = f_trial;
      result.report.fit.push_back(parts.fit);
      result.report.vol.push_back(parts.vol);
      result.report.pol.push_back(parts.pol);
      result.report.anchor.push_back(parts.anchor);
      result.report.total.push_back(f);
      ++result.report.accepted_steps;
      eta = std::min(eta * 1.25, eta_cap);
    } else {
      eta *= hyper.backtrack_factor;
    }
  }

  result.report.final_objective = f;
  result.report.final_fit = parts.fit;
  result.report.final_vol = parts.vol;
  result.report.final_pol = parts.pol;
  result.report.final_anchor = parts.anchor;
  return result;
}

EvalMetrics evaluate(const TransitionParams& theta, const PolicyParams& psi,
                     const LatentEnv& env) {
  if (theta.kind != TransitionParams::Kind::kTabular || !env.finite()) {
    throw std::invalid_argument(
        "evaluate: tabular parameterization and finite environment required");
  }
  if (theta.num_states() != env.num_states() ||
      psi.num_states() != env.num_states() || psi.k != env.k ||
      psi.m != env.m ||
      int(theta.logits.front().rows()) != env.space.size ||
      int(theta.logits.front().cols()) != env.k) {
    throw std::invalid_argument("evaluate: shape mismatch with environment");
  }

  EvalMetrics metrics;
  double sum_T = 0.0;
  double sum_Pi = 0.0;
  for (int s = 0; s < env.num_states(); ++s) {
    const Eigen::MatrixXd T = theta.transition(s);
    const Eigen::MatrixXd Pi = psi.policy(s);
    const Eigen::MatrixXd& T_ref = env.T_star[std::size_t(s)].matrix();
    const Eigen::MatrixXd& Pi_ref = env.Pi_star[std::size_t(s)].matrix();
    const PermutationMatch match = best_permutation_error(T, T_ref, Pi, Pi_ref);

    double tv_T = 0.0;
    for (int a = 0; a < env.k; ++a) {
      tv_T = std::max(
          tv_T, tv_distance(T.col(a), T_ref.col(match.perm[std::size_t(a)])));
    }
    double tv_Pi = 0.0;
    const Eigen::MatrixXd Pi_ref_perm = permute_rows(Pi_ref, match.perm);
    for (int e = 0; e < env.m; ++e) {
      tv_Pi = std::max(tv_Pi, tv_distance(Pi.col(e), Pi_ref_perm.col(e)));
    }
    metrics.perm.push_back(match.perm);
    metrics.tv_T.push_back(tv_T);
    metrics.tv_Pi.push_back(tv_Pi);
    metrics.max_tv_T = std::max(metrics.max_tv_T, tv_T);
    metrics.max_tv_Pi = std::max(metrics.max_tv_Pi, tv_Pi);
    sum_T += tv_T;
    sum_Pi += tv_Pi;
  }
  metrics.mean_tv_T = sum_T / double(env.num_states());
  metrics.mean_tv_Pi = sum_Pi / double(env.num_states());
  return metrics;
}

std::string fit_report_to_csv(const FitReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "step,fit,vol,pol,anchor,total\n";
  for (std::size_t i = 0; i < report.total.size(); ++i) {
    out << i << "," << report.fit[i] << "," << report.vol[i] << ","
        << report.pol[i] << "," << report.anchor[i] << "," << report.total[i]
        << "\n";
  }
  return out.str();
}

}  // namespace latentact
