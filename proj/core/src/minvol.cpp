#include "latentact/minvol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "latentact/numeric.hpp"
#include "latentact/rng.hpp"

namespace latentact {

namespace {

Eigen::MatrixXd sqrt_psd(const Eigen::Ref<const Eigen::MatrixXd>& K) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
  Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
}

// Minimizes x^T Q x + 2 c^T x over the probability simplex. Exact support
// enumeration for small dimensions, FISTA otherwise. The objective is
// normalized first: large penalty weights would otherwise wreck the
// conditioning of the KKT solves.
Eigen::VectorXd simplex_quadratic_min(Eigen::MatrixXd Q, Eigen::VectorXd c,
                                      const Eigen::VectorXd& x0,
                                      double simplex_tol) {
  const double scale = std::max(Q.cwiseAbs().maxCoeff(), 1e-300);
  Q /= scale;
  c /= scale;
  const Eigen::Index n = Q.rows();
  if (n <= 12) {
    Eigen::LLT<Eigen::MatrixXd> llt(Q);
    if (llt.info() == Eigen::Success) {
      const Eigen::MatrixXd A = llt.matrixU();
      const Eigen::VectorXd b = -llt.matrixL().solve(c);
      return simplex_least_squares(A, b, simplex_tol);
    }
  }
  // FISTA with exact Lipschitz constant and restart on non-monotonicity.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
  const double lip = 2.0 * std::max(es.eigenvalues().maxCoeff(), 1e-30);
  Eigen::VectorXd x = project_to_simplex(x0);
  Eigen::VectorXd y = x;
  double t = 1.0;
  double f_prev = x.dot(Q * x) + 2.0 * c.dot(x);
  for (int iter = 0; iter < 500; ++iter) {
    const Eigen::VectorXd grad = 2.0 * (Q * y + c);
    const Eigen::VectorXd x_next = project_to_simplex(y - grad / lip);
    const double f_next = x_next.dot(Q * x_next) + 2.0 * c.dot(x_next);
    if (f_next > f_prev) {  // restart momentum
      y = x;
      t = 1.0;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = x_next + ((t - 1.0) / t_next) * (x_next - x);
    if ((x_next - x).cwiseAbs().maxCoeff() < std::max(simplex_tol, 1e-15)) {
      x = x_next;
      break;
    }
    x = x_next;
    f_prev = f_next;
    t = t_next;
  }
  return x;
}

// min ||b - A x|| over the simplex, dispatching on dimension.
Eigen::VectorXd simplex_ls_any(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                               const Eigen::VectorXd& x0, double simplex_tol) {
  if (A.cols() <= 12) return simplex_least_squares(A, b, simplex_tol);
  return simplex_quadratic_min(A.transpose() * A, -A.transpose() * b, x0,
                               simplex_tol);
}

Eigen::MatrixXd solve_pi(const Eigen::MatrixXd& P, const Eigen::MatrixXd& T,
                         const Eigen::MatrixXd* warm, double simplex_tol) {
  Eigen::MatrixXd Pi(T.cols(), P.cols());
  Eigen::VectorXd x0 = Eigen::VectorXd::Constant(T.cols(), 1.0 / double(T.cols()));
  for (Eigen::Index j = 0; j < P.cols(); ++j) {
    Pi.col(j) = simplex_ls_any(T, P.col(j),
                               warm ? Eigen::VectorXd(warm->col(j)) : x0,
                               simplex_tol);
  }
  return Pi;
}

struct CoreOutcome {
  Eigen::MatrixXd T;
  Eigen::MatrixXd Pi;
  double residual = 0.0;
  bool converged = false;
};

CoreOutcome alternate(const Eigen::MatrixXd& P, const Eigen::MatrixXd* metric,
                      Eigen::MatrixXd T, const SolverOptions& opts,
                      double rho_start) {
  const Eigen::Index k = T.cols();
  Eigen::MatrixXd Pi = solve_pi(P, T, nullptr, opts.simplex_tol);
  double rho = rho_start;
  bool converged = false;

  const Eigen::MatrixXd identity_k = Eigen::MatrixXd::Identity(k, k);
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    const Eigen::MatrixXd T_prev = T;
    const Eigen::MatrixXd Pi_prev = Pi;

    // Majorize log det(T^T K T + eps I) at the current iterate.
    const Eigen::MatrixXd G =
        metric ? Eigen::MatrixXd(T.transpose() * (*metric) * T)
               : Eigen::MatrixXd(T.transpose() * T);
    const Eigen::MatrixXd W =
        (G + opts.eps_det * identity_k).ldlt().solve(identity_k);

    const Eigen::MatrixXd M = Pi * Pi.transpose();
    const Eigen::MatrixXd B = P * Pi.transpose();

    for (int sweep = 0; sweep < opts.sweeps_per_iter; ++sweep) {
      for (Eigen::Index a = 0; a < k; ++a) {
        const Eigen::VectorXd cross_w = T * W.col(a) - W(a, a) * T.col(a);
        const Eigen::VectorXd cross_m =
            T * M.col(a) - M(a, a) * T.col(a) - B.col(a);
        if (!metric) {
          const double alpha = W(a, a) + rho * M(a, a);
          const Eigen::VectorXd c = cross_w + rho * cross_m;
          T.col(a) = project_to_simplex(-c / alpha);
        } else {
          const Eigen::MatrixXd Q =
              W(a, a) * (*metric) +
              rho * M(a, a) * Eigen::MatrixXd::Identity(P.rows(), P.rows());
          const Eigen::VectorXd c = (*metric) * cross_w + rho * cross_m;
          T.col(a) = simplex_quadratic_min(Q, c, T.col(a), opts.simplex_tol);
        }
      }
    }

    Pi = solve_pi(P, T, &Pi_prev, opts.simplex_tol);

    const double delta = std::max((T - T_prev).cwiseAbs().maxCoeff(),
                                  (Pi - Pi_prev).cwiseAbs().maxCoeff());
    if (rho >= opts.rho_max && delta < 1e-14) {
      converged = true;
      break;
    }
    rho = std::min(rho * opts.rho_growth, opts.rho_max);
  }

  // Final feasibility refinement: min ||P - T Pi|| at fixed T.
  Pi = solve_pi(P, T, &Pi, opts.simplex_tol);
  CoreOutcome out;
  out.T = std::move(T);
  out.Pi = std::move(Pi);
  out.residual = (P - out.T * out.Pi).norm();
  out.converged = converged;
  return out;
}

Eigen::MatrixXd truncate_to_rank(const Eigen::MatrixXd& P, int r) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      P, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd sv = svd.singularValues();
  for (Eigen::Index i = r; i < sv.size(); ++i) sv(i) = 0.0;
  Eigen::MatrixXd out =
      svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
  out = out.cwiseMax(0.0);
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double s = out.col(j).sum();
    if (s > 0.0) out.col(j) /= s;
  }
  return out;
}

Eigen::MatrixXd restart_init(const Eigen::MatrixXd& P, int k,
                             const std::vector<int>& spa_cols, int restart,
                             std::uint64_t seed) {
  const Eigen::Index n = P.rows();
  Eigen::MatrixXd T0(n, k);
  if (restart == 0) {
    for (int a = 0; a < k; ++a) T0.col(a) = P.col(spa_cols[std::size_t(a)]);
    return T0;
  }
  Rng rng(derive_seed(seed, "minvol-restart", std::uint64_t(restart)));
  if (restart % 2 == 1) {
    // SPA columns with simplex jitter.
    for (int a = 0; a < k; ++a) {
      const Eigen::VectorXd base = P.col(spa_cols[std::size_t(a)]);
      T0.col(a) = 0.7 * base + 0.3 * rng.simplex_uniform(n);
    }
  } else {
    // Random distinct data columns with jitter.
    std::vector<int> idx(static_cast<std::size_t>(P.cols()));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = int(i);
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::swap(idx[i - 1], idx[std::size_t(rng.uniform_index(i))]);
    }
    for (int a = 0; a < k; ++a) {
      const Eigen::VectorXd base = P.col(idx[std::size_t(a % int(idx.size()))]);
      T0.col(a) = 0.6 * base + 0.4 * rng.simplex_uniform(n);
    }
  }
  return T0;
}

StochasticMatrix normalize_columns(Eigen::MatrixXd m) {
  m = m.cwiseMax(0.0);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double s = m.col(j).sum();
    if (s > 0.0) m.col(j) /= s;
  }
  return StochasticMatrix(std::move(m));
}

FactorizationResult solve_impl(const Eigen::MatrixXd& P,
                               const Eigen::MatrixXd* metric,
                               const SolverOptions& opts) {
  if (opts.k < 1) throw std::invalid_argument("minvol_factorize: k must be >= 1");
  if (opts.restarts < 1) {
    throw std::invalid_argument("minvol_factorize: restarts must be >= 1");
  }
  if (!(opts.eps_det > 0.0)) {
    throw std::invalid_argument("minvol_factorize: eps_det must be > 0");
  }

  const Eigen::MatrixXd embedded = metric ? Eigen::MatrixXd(sqrt_psd(*metric) * P) : P;
  const int effective_rank = numerical_rank(embedded, opts.rank_tol);

  int k_solve = opts.k;
  Eigen::MatrixXd P_solve = P;
  const int k_cap = int(std::min(P.rows(), P.cols()));
  if (effective_rank < opts.k || opts.k > k_cap) {
    if (!opts.allow_rank_reduction) throw RankDeficiencyError(effective_rank, opts.k);
    k_solve = std::min(effective_rank, k_cap);
    if (k_solve < 1) throw RankDeficiencyError(effective_rank, opts.k);
    if (!metric) P_solve = truncate_to_rank(P, k_solve);
  }

  const std::vector<int> spa_cols =
      metric ? spa_init_metric(P_solve, k_solve, *metric)
             : spa_init(P_solve, k_solve);

  bool have_best = false;
  CoreOutcome best;
  double best_objective = std::numeric_limits<double>::infinity();
  int best_restart = 0;
  double best_residual_any = std::numeric_limits<double>::infinity();

  for (int r = 0; r < opts.restarts; ++r) {
    Eigen::MatrixXd T0 = restart_init(P_solve, k_solve, spa_cols, r, opts.seed);
    // The SPA restart runs the schedule from a fit-dominated penalty so its
    // init geometry survives the early iterations; the remaining restarts
    // ramp from rho0 and search lower-volume basins.
    const double rho_start =
        r == 0 ? std::max(opts.rho0, 0.01 * opts.rho_max) : opts.rho0;
    CoreOutcome cand = alternate(P_solve, metric, std::move(T0), opts, rho_start);
    best_residual_any = std::min(best_residual_any, cand.residual);
    if (cand.residual > opts.feasibility_tol) continue;
    const double obj = metric ? gram_det_metric(cand.T, *metric) : gram_det(cand.T);
    const bool better =
        !have_best || obj < best_objective - 1e-15 ||
        (std::abs(obj - best_objective) <= 1e-15 && cand.residual < best.residual);
    if (better) {
      have_best = true;
      best = std::move(cand);
      best_objective = obj;
      best_restart = r;
    }
  }

  if (!have_best) throw InfeasibleError(best_residual_any, opts.feasibility_tol);

  FactorizationResult result;
  result.T = normalize_columns(best.T);
  result.Pi = normalize_columns(best.Pi);
  result.objective = metric ? gram_det_metric(result.T.matrix(), *metric)
                            : gram_det(result.T.matrix());
  result.residual = (P_solve - result.T.matrix() * result.Pi.matrix()).norm();
  result.effective_rank = effective_rank;
  result.solved_k = k_solve;
  result.restarts_used = opts.restarts;
  result.best_restart = best_restart;
  result.converged = best.converged;
  return result;
}

}  // namespace

RankDeficiencyError::RankDeficiencyError(int effective_rank_in, int requested_k_in)
    : std::runtime_error([&] {
        std::ostringstream msg;
        msg << "minvol_factorize: numerical rank " << effective_rank_in
            << " below requested k = " << requested_k_in
            << " (enable rank reduction to factorize at the effective rank)";
        return msg.str();
      }()),
      effective_rank(effective_rank_in),
      requested_k(requested_k_in) {}

InfeasibleError::InfeasibleError(double best_residual_in, double tolerance_in)
    : std::runtime_error([&] {
        std::ostringstream msg;
        msg << "minvol_factorize: infeasible after all restarts; best residual "
            << best_residual_in << " exceeds tolerance " << tolerance_in;
        return msg.str();
      }()),
      best_residual(best_residual_in),
      tolerance(tolerance_in) {}

std::vector<int> spa_init(const Eigen::Ref<const Eigen::MatrixXd>& P, int k) {
  if (k < 1) throw std::invalid_argument("spa_init: k must be >= 1");
  if (k > P.cols()) {
    throw std::invalid_argument("spa_init: k exceeds the number of columns");
  }
  Eigen::MatrixXd R = P;
  const double scale = std::max(1.0, R.colwise().norm().maxCoeff());
  std::vector<int> selected;
  selected.reserve(std::size_t(k));
  for (int pick = 0; pick < k; ++pick) {
    Eigen::Index best_j = 0;
    double best_norm = -1.0;
    for (Eigen::Index j = 0; j < R.cols(); ++j) {
      const double nj = R.col(j).norm();
      if (nj > best_norm + 1e-15) {
        best_norm = nj;
        best_j = j;
      }
    }
    if (best_norm <= 1e-10 * scale) {
      std::ostringstream msg;
      msg << "spa_init: residual columns numerically rank-deficient after "
          << pick << " selections";
      throw std::runtime_error(msg.str());
    }
    const Eigen::VectorXd u = R.col(best_j) / best_norm;
    R -= u * (u.transpose() * R);
    selected.push_back(int(best_j));
  }
  return selected;
}

std::vector<int> spa_init_metric(const Eigen::Ref<const Eigen::MatrixXd>& P, int k,
                                 const Eigen::Ref<const Eigen::MatrixXd>& metric) {
  return spa_init(Eigen::MatrixXd(sqrt_psd(metric) * P), k);
}

double gram_det(const Eigen::Ref<const Eigen::MatrixXd>& T) {
  const Eigen::MatrixXd G = T.transpose() * T;
  return std::max(0.0, G.determinant());
}

double gram_det_metric(const Eigen::Ref<const Eigen::MatrixXd>& T,
                       const Eigen::Ref<const Eigen::MatrixXd>& metric) {
  const Eigen::MatrixXd G = T.transpose() * metric * T;
  return std::max(0.0, G.determinant());
}

FactorizationResult minvol_factorize(const StochasticMatrix& P,
                                     const SolverOptions& opts) {
  return solve_impl(P.matrix(), nullptr, opts);
}

FactorizationResult minvol_factorize_metric(
    const Eigen::Ref<const Eigen::MatrixXd>& P,
    const Eigen::Ref<const Eigen::MatrixXd>& metric, const SolverOptions& opts) {
  if (metric.rows() != P.rows() || metric.cols() != P.rows()) {
    throw std::invalid_argument("minvol_factorize_metric: metric shape mismatch");
  }
  const Eigen::MatrixXd K = metric;
  return solve_impl(P, &K, opts);
}

PermutationMatch best_permutation_error(
    const Eigen::Ref<const Eigen::MatrixXd>& T,
    const Eigen::Ref<const Eigen::MatrixXd>& T_ref,
    const Eigen::Ref<const Eigen::MatrixXd>& Pi,
    const Eigen::Ref<const Eigen::MatrixXd>& Pi_ref) {
  const int k = int(T.cols());
  if (T_ref.cols() != k || Pi.rows() != k || Pi_ref.rows() != k ||
      T_ref.rows() != T.rows() || Pi_ref.cols() != Pi.cols()) {
    throw std::invalid_argument("best_permutation_error: shape mismatch");
  }

  PermutationMatch best;
  best.error = std::numeric_limits<double>::infinity();
  for_each_permutation(k, [&](const std::vector<int>& perm) {
    double err = 0.0;
    for (int a = 0; a < k; ++a) {
      const int b = perm[std::size_t(a)];
      err = std::max(err, (T.col(a) - T_ref.col(b)).cwiseAbs().maxCoeff());
      err = std::max(err, (Pi.row(a) - Pi_ref.row(b)).cwiseAbs().maxCoeff());
      if (err >= best.error) return;
    }
    if (err < best.error) {
      best.error = err;
      best.perm = perm;
    }
  });
  return best;
}

DetBoundReport check_det_bound(const Eigen::Ref<const Eigen::MatrixXd>& A,
                               const StochasticMatrix& Pi_star) {
  const int k = int(A.rows());
  if (A.cols() != k) throw std::invalid_argument("check_det_bound: A must be square");
  if (Pi_star.rows() != k) {
    throw std::invalid_argument("check_det_bound: Pi_star row count must equal k");
  }

  DetBoundReport report;
  const Eigen::MatrixXd prod = A * Pi_star.matrix();
  report.min_product_entry = prod.minCoeff();
  report.column_sum_deviation =
      (A.colwise().sum().array() - 1.0).abs().maxCoeff();
  report.feasible = report.min_product_entry >= -1e-12 &&
                    report.column_sum_deviation <= 1e-10;
  report.abs_det = std::abs(A.determinant());
  report.bound_holds = report.abs_det <= 1.0 + 1e-10;
  report.near_extremal = report.abs_det >= 1.0 - 1e-8;

  double best_dist = std::numeric_limits<double>::infinity();
  for_each_permutation(k, [&](const std::vector<int>& perm) {
    double dist = 0.0;
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        const double target = perm[std::size_t(j)] == i ? 1.0 : 0.0;
        dist = std::max(dist, std::abs(A(i, j) - target));
        if (dist >= best_dist) return;
      }
    }
    best_dist = std::min(best_dist, dist);
  });
  report.distance_to_permutation = best_dist;
  return report;
}

}  // namespace latentact
