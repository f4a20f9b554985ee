#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "latentact/stochastic_matrix.hpp"

namespace latentact {

enum class DiversityVerdict {
  kCertifiedSufficient,  // ranks pass and the policy matrix is separable
  kPlausible,            // ranks pass and every boundary sample lies in the cone
  kViolated,             // a rank condition fails
  kInconclusive,
};

std::string to_string(DiversityVerdict v);

struct DiversityOptions {
  double rank_tol = 1e-9;
  double separability_tol = 0.05;  // max-abs distance to a unit column
  int mc_samples = 2000;
  double nnls_tol = 1e-8;  // 1e-3 is appropriate for estimated policy matrices
  std::uint64_t seed = 0;
};

struct DiversityReport {
  int k = 0;
  int rank_P = 0;
  int rank_Pi = 0;
  bool separable = false;
  double mc_pass_rate = 0.0;
  DiversityVerdict verdict = DiversityVerdict::kInconclusive;
  DiversityOptions tolerances;
};

// Numerical rank of M with pass = (rank >= k).
std::pair<int, bool> check_rank(const Eigen::Ref<const Eigen::MatrixXd>& M, int k,
                                double tol);

// True iff every latent action has some policy column within max-abs tol of
// its unit vector: a checkable sufficient condition for sufficiently
// scattered.
bool check_separability(const StochasticMatrix& Pi, double tol);

// Monte-Carlo necessary test for C_k <= cone(columns of Pi): samples points
// on the boundary of the second-order cone C_k (unit norm, 1^T x =
// sqrt(k-1)) and tests cone membership by nonnegative least squares. Returns
// the passing fraction; never certifies sufficiency by itself.
double mc_scattered_check(const StochasticMatrix& Pi, int num_samples,
                          std::uint64_t seed, double tol);

DiversityReport diversity_report(const Eigen::Ref<const Eigen::MatrixXd>& P,
                                 const StochasticMatrix& Pi, int k,
                                 const DiversityOptions& opts);

}  // namespace latentact
