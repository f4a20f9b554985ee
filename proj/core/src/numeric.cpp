#include "latentact/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

namespace latentact {

Eigen::VectorXd project_to_simplex(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const Eigen::Index n = v.size();
  if (n == 0) throw std::invalid_argument("project_to_simplex: empty vector");

  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());

  double cumulative = 0.0;
  double lambda = 0.0;
  Eigen::Index support = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    cumulative += u[static_cast<std::size_t>(i)];
    const double candidate = (1.0 - cumulative) / static_cast<double>(i + 1);
    if (u[static_cast<std::size_t>(i)] + candidate > 0.0) {
      lambda = candidate;
      support = i + 1;
    }
  }
  (void)support;
  return (v.array() + lambda).max(0.0);
}

namespace {

// Solves the equality-constrained least squares on a fixed support:
//   min ||A_S x - b||^2  s.t.  1^T x = 1
// via the KKT system. Returns false if the system is singular.
bool solve_on_support(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                      const std::vector<int>& support, Eigen::VectorXd& x_out,
                      double& mu_out) {
  const int s = static_cast<int>(support.size());
  Eigen::MatrixXd As(A.rows(), s);
  for (int i = 0; i < s; ++i) As.col(i) = A.col(support[static_cast<std::size_t>(i)]);

  Eigen::MatrixXd kkt(s + 1, s + 1);
  kkt.topLeftCorner(s, s) = 2.0 * As.transpose() * As;
  kkt.topRightCorner(s, 1).setOnes();
  kkt.bottomLeftCorner(1, s).setOnes();
  kkt(s, s) = 0.0;

  Eigen::VectorXd rhs(s + 1);
  rhs.head(s) = 2.0 * As.transpose() * b;
  rhs(s) = 1.0;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  if (!lu.isInvertible()) return false;
  const Eigen::VectorXd sol = lu.solve(rhs);
  x_out = sol.head(s);
  mu_out = sol(s);
  return true;
}

}  // namespace

Eigen::VectorXd simplex_least_squares(const Eigen::Ref<const Eigen::MatrixXd>& A,
                                      const Eigen::Ref<const Eigen::VectorXd>& b,
                                      double feasibility_tol) {
  const int k = static_cast<int>(A.cols());
  if (k == 0) throw std::invalid_argument("simplex_least_squares: no columns");
  if (k > 16) {
    throw std::invalid_argument(
        "simplex_least_squares: support enumeration limited to 16 columns");
  }
  if (A.rows() != b.size()) {
    throw std::invalid_argument("simplex_least_squares: shape mismatch");
  }

  // The global optimum restricted to its own support solves the
  // equality-constrained system on that support, so minimizing the objective
  // over all primal-feasible support solutions finds it.
  const double kFeasTol = feasibility_tol;
  double best_obj = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best = Eigen::VectorXd::Zero(k);
  best(0) = 1.0;

  std::vector<int> support;
  Eigen::VectorXd xs;
  double mu = 0.0;
  for (unsigned mask = 1; mask < (1u << k); ++mask) {
    support.clear();
    for (int j = 0; j < k; ++j) {
      if (mask & (1u << j)) support.push_back(j);
    }
    if (!solve_on_support(A, b, support, xs, mu)) continue;
    if ((xs.array() < -kFeasTol).any()) continue;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(k);
    for (int i = 0; i < static_cast<int>(support.size()); ++i) {
      x(support[static_cast<std::size_t>(i)]) = std::max(0.0, xs(i));
    }
    const double obj = (A * x - b).squaredNorm();
    if (obj < best_obj) {
      best_obj = obj;
      best = x;
    }
  }
  // Renormalize away accumulated round-off.
  const double s = best.sum();
  if (s > 0.0) best /= s;
  return best;
}

Eigen::VectorXd nnls(const Eigen::Ref<const Eigen::MatrixXd>& A,
                     const Eigen::Ref<const Eigen::VectorXd>& b, int max_iter) {
  const int n = static_cast<int>(A.cols());
  if (max_iter <= 0) max_iter = 3 * n + 30;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff());

  for (int iter = 0; iter < max_iter; ++iter) {
    const Eigen::VectorXd w = A.transpose() * (b - A * x);
    int best_j = -1;
    double best_w = tol;
    for (int j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best_j = j;
      }
    }
    if (best_j < 0) break;
    passive[static_cast<std::size_t>(best_j)] = true;

    // Inner loop: unconstrained LS on the passive set, stepping back when the
    // solution leaves the nonnegative orthant.
    for (;;) {
      std::vector<int> idx;
      for (int j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
      }
      Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t i = 0; i < idx.size(); ++i) {
        Ap.col(static_cast<Eigen::Index>(i)) = A.col(idx[i]);
      }
      const Eigen::VectorXd z =
          Ap.colPivHouseholderQr().solve(b);

      bool all_positive = true;
      double alpha = 1.0;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        if (z(static_cast<Eigen::Index>(i)) <= 0.0) {
          all_positive = false;
          const double xi = x(idx[i]);
          const double zi = z(static_cast<Eigen::Index>(i));
          if (xi - zi > 0.0) alpha = std::min(alpha, xi / (xi - zi));
        }
      }
      if (all_positive) {
        x.setZero();
        for (std::size_t i = 0; i < idx.size(); ++i) {
          x(idx[i]) = z(static_cast<Eigen::Index>(i));
        }
        break;
      }
      for (std::size_t i = 0; i < idx.size(); ++i) {
        x(idx[i]) += alpha * (z(static_cast<Eigen::Index>(i)) - x(idx[i]));
      }
      for (int j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x(j) <= 1e-14) {
          x(j) = 0.0;
          passive[static_cast<std::size_t>(j)] = false;
        }
      }
    }
  }
  return x;
}

int numerical_rank(const Eigen::Ref<const Eigen::MatrixXd>& m, double tol) {
  if (m.size() == 0) throw std::invalid_argument("numerical_rank: empty matrix");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol * sv(0)) ++rank;
  }
  return rank;
}

double tv_distance(const Eigen::Ref<const Eigen::VectorXd>& p,
                   const Eigen::Ref<const Eigen::VectorXd>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("tv_distance: size mismatch");
  return 0.5 * (p - q).lpNorm<1>();
}

void for_each_permutation(int k,
                          const std::function<void(const std::vector<int>&)>& fn) {
  if (k < 1) throw std::invalid_argument("for_each_permutation: k must be >= 1");
  if (k > 9) {
    throw std::invalid_argument(
        "for_each_permutation: exhaustive search limited to k <= 9");
  }
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  do {
    fn(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

Eigen::MatrixXd permute_columns(const Eigen::Ref<const Eigen::MatrixXd>& m,
                                const std::vector<int>& perm) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Eigen::Index a = 0; a < m.cols(); ++a) {
    out.col(a) = m.col(perm[static_cast<std::size_t>(a)]);
  }
  return out;
}

Eigen::MatrixXd permute_rows(const Eigen::Ref<const Eigen::MatrixXd>& m,
                             const std::vector<int>& perm) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Eigen::Index a = 0; a < m.rows(); ++a) {
    out.row(a) = m.row(perm[static_cast<std::size_t>(a)]);
  }
  return out;
}

std::vector<int> invert_permutation(const std::vector<int>& perm) {
  std::vector<int> inv(perm.size());
  for (std::size_t a = 0; a < perm.size(); ++a) {
    inv[static_cast<std::size_t>(perm[a])] = static_cast<int>(a);
  }
  return inv;
}

std::vector<int> compose_permutations(const std::vector<int>& outer,
                                      const std::vector<int>& inner) {
  std::vector<int> out(inner.size());
  for (std::size_t a = 0; a < inner.size(); ++a) {
    out[a] = outer[static_cast<std::size_t>(inner[a])];
  }
  return out;
}

}  // namespace latentact
