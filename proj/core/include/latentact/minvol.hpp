#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "latentact/stochastic_matrix.hpp"

namespace latentact {

// Options for the minimum-volume column-stochastic factorization solver.
// The solver alternates exact per-column simplex least squares for Pi with
// majorize-minimize block updates for T on the penalized objective
//   log det(T^T T + eps_det I) + rho ||P - T Pi||_F^2,
// growing rho geometrically so the exact-fit constraint dominates at the end.
struct SolverOptions {
  int k = 1;
  int restarts = 8;
  int max_iters = 120;
  int sweeps_per_iter = 3;
  double rho0 = 100.0;
  double rho_growth = 2.0;
  double rho_max = 1e11;
  double eps_det = 1e-12;        // inside logs only; reported objective is unregularized
  double simplex_tol = 1e-12;
  double feasibility_tol = 1e-8; // exact-data default; use ~3/sqrt(N_min) for sampled data
  double rank_tol = 1e-9;        // relative singular-value cutoff for the effective rank
  bool allow_rank_reduction = false;
  std::uint64_t seed = 0;
};

struct FactorizationResult {
  StochasticMatrix T;    // n x k
  StochasticMatrix Pi;   // k x m
  double objective = 0.0;   // det(T^T T), unregularized (metric-weighted when applicable)
  double residual = 0.0;    // ||P - T Pi||_F
  int effective_rank = 0;   // numerical rank of P
  int solved_k = 0;         // k actually factorized (may be < requested under rank reduction)
  int restarts_used = 0;
  int best_restart = 0;
  bool converged = false;   // alternation reached a fixed point within budget
};

class RankDeficiencyError : public std::runtime_error {
 public:
  RankDeficiencyError(int effective_rank, int requested_k);
  int effective_rank;
  int requested_k;
};

class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(double best_residual, double tolerance);
  double best_residual;
  double tolerance;
};

// Successive projection: k column indices of P chosen by residual-norm
// maximization after orthogonal deflation. Deterministic; ties break to the
// lowest index. The optional metric selects in the geometry induced by the
// PSD matrix K (inner product x^T K y); identity when omitted.
std::vector<int> spa_init(const Eigen::Ref<const Eigen::MatrixXd>& P, int k);
std::vector<int> spa_init_metric(const Eigen::Ref<const Eigen::MatrixXd>& P, int k,
                                 const Eigen::Ref<const Eigen::MatrixXd>& metric);

// det(T^T T), clamped at zero for tiny round-off negatives: the squared
// k-dimensional volume spanned by the columns of T.
double gram_det(const Eigen::Ref<const Eigen::MatrixXd>& T);
double gram_det_metric(const Eigen::Ref<const Eigen::MatrixXd>& T,
                       const Eigen::Ref<const Eigen::MatrixXd>& metric);

// Minimum-volume factorization P = T Pi over column-stochastic factors.
FactorizationResult minvol_factorize(const StochasticMatrix& P,
                                     const SolverOptions& opts);

// Same program with the volume measured as det(T^T K T) for a PSD metric K;
// backs the dictionary-coordinate continuous solver.
FactorizationResult minvol_factorize_metric(const Eigen::Ref<const Eigen::MatrixXd>& P,
                                            const Eigen::Ref<const Eigen::MatrixXd>& metric,
                                            const SolverOptions& opts);

struct PermutationMatch {
  std::vector<int> perm;  // column a of T matches column perm[a] of T_ref
  double error = 0.0;     // max of the two max-abs factor errors under perm
};

// Exhaustive search over the k! relabelings (k <= 9) for the permutation
// minimizing max(max-abs error on T, max-abs error on Pi), where T's columns
// and Pi's rows are relabeled together.
PermutationMatch best_permutation_error(const Eigen::Ref<const Eigen::MatrixXd>& T,
                                        const Eigen::Ref<const Eigen::MatrixXd>& T_ref,
                                        const Eigen::Ref<const Eigen::MatrixXd>& Pi,
                                        const Eigen::Ref<const Eigen::MatrixXd>& Pi_ref);

// Report for the determinant bound satisfied by any feasible relabeling
// matrix A (A Pi >= 0 entrywise, columns of A summing to one): |det A| <= 1,
// with equality exactly at permutation matrices.
struct DetBoundReport {
  bool feasible = false;
  double min_product_entry = 0.0;     // min entry of A * Pi
  double column_sum_deviation = 0.0;  // max |1^T A - 1|
  double abs_det = 0.0;
  bool bound_holds = false;      // |det A| <= 1 + 1e-10
  bool near_extremal = false;    // |det A| >= 1 - 1e-8
  double distance_to_permutation = 0.0;  // min over perms of max-abs(A - Sigma)
};

DetBoundReport check_det_bound(const Eigen::Ref<const Eigen::MatrixXd>& A,
                               const StochasticMatrix& Pi_star);

}  // namespace latentact
