#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace latentact {

// Euclidean projection onto the probability simplex {x >= 0, sum x = 1}
// (sort-based algorithm).
Eigen::VectorXd project_to_simplex(const Eigen::Ref<const Eigen::VectorXd>& v);

// Exact minimizer of ||A x - b||_2 over the probability simplex, found by
// enumerating support sets and checking the KKT conditions. Intended for
// small column counts (guarded at A.cols() <= 16). feasibility_tol bounds the
// negativity accepted from a support solve before it is clamped to zero.
Eigen::VectorXd simplex_least_squares(const Eigen::Ref<const Eigen::MatrixXd>& A,
                                      const Eigen::Ref<const Eigen::VectorXd>& b,
                                      double feasibility_tol = 1e-11);

// Lawson-Hanson nonnegative least squares: min ||A x - b||, x >= 0.
Eigen::VectorXd nnls(const Eigen::Ref<const Eigen::MatrixXd>& A,
                     const Eigen::Ref<const Eigen::VectorXd>& b,
                     int max_iter = 0);

// Numerical rank: number of singular values > tol * max singular value.
int numerical_rank(const Eigen::Ref<const Eigen::MatrixXd>& m, double tol);

// Total-variation distance between two probability vectors: 0.5 * ||p - q||_1.
double tv_distance(const Eigen::Ref<const Eigen::VectorXd>& p,
                   const Eigen::Ref<const Eigen::VectorXd>& q);

// Invokes fn on every permutation of {0,...,k-1}. Guarded at k <= 9.
void for_each_permutation(int k, const std::function<void(const std::vector<int>&)>& fn);

// Applies a permutation as a column relabeling: out.col(a) = m.col(perm[a]).
Eigen::MatrixXd permute_columns(const Eigen::Ref<const Eigen::MatrixXd>& m,
                                const std::vector<int>& perm);

// Applies a permutation as a row relabeling: out.row(a) = m.row(perm[a]).
Eigen::MatrixXd permute_rows(const Eigen::Ref<const Eigen::MatrixXd>& m,
                             const std::vector<int>& perm);

std::vector<int> invert_permutation(const std::vector<int>& perm);

std::vector<int> compose_permutations(const std::vector<int>& outer,
                                      const std::vector<int>& inner);

}  // namespace latentact
