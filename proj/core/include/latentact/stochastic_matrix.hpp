#pragma once

#include <Eigen/Core>

namespace latentact {

// Default tolerances for the column-stochastic invariants. Entries may dip to
// -kEntryTol from floating-point simplex projections and are clamped to zero
// before the column-sum check.
inline constexpr double kEntryTol = 1e-12;
inline constexpr double kColumnSumTol = 1e-10;

// Nonnegative matrix with unit column sums; the carrier of observable
// conditionals P_o, latent transition factors T_o, and policy matrices Pi_o.
class StochasticMatrix {
 public:
  StochasticMatrix() = default;

  // Validates (and clamps tiny negatives); throws std::invalid_argument with
  // the max column-sum deviation on failure.
  explicit StochasticMatrix(Eigen::MatrixXd m, double column_sum_tol = kColumnSumTol);

  const Eigen::MatrixXd& matrix() const { return m_; }
  Eigen::Index rows() const { return m_.rows(); }
  Eigen::Index cols() const { return m_.cols(); }
  Eigen::VectorXd col(Eigen::Index j) const { return m_.col(j); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  double column_sum_tolerance() const { return column_sum_tol_; }

  // Diagnostics used both by validation and by error reporting.
  static double max_column_sum_deviation(const Eigen::MatrixXd& m);
  static double min_entry(const Eigen::MatrixXd& m);
  static bool is_column_stochastic(const Eigen::MatrixXd& m,
                                   double column_sum_tol = kColumnSumTol,
                                   double entry_tol = kEntryTol);

 private:
  Eigen::MatrixXd m_;
  double column_sum_tol_ = kColumnSumTol;
};

}  // namespace latentact
