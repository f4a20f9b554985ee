#include "latentact/stochastic_matrix.hpp"

#include <sstream>
#include <stdexcept>

namespace latentact {

StochasticMatrix::StochasticMatrix(Eigen::MatrixXd m, double column_sum_tol)
    : column_sum_tol_(column_sum_tol) {
  if (m.size() == 0) {
    throw std::invalid_argument("StochasticMatrix: empty matrix");
  }
  const double lowest = min_entry(m);
  if (lowest < -kEntryTol) {
    std::ostringstream msg;
    msg << "StochasticMatrix: negative entry " << lowest << " below tolerance "
        << -kEntryTol;
    throw std::invalid_argument(msg.str());
  }
  m = m.cwiseMax(0.0);
  const double dev = max_column_sum_deviation(m);
  if (dev > column_sum_tol) {
    std::ostringstream msg;
    msg << "StochasticMatrix: max column-sum deviation " << dev
        << " exceeds tolerance " << column_sum_tol;
    throw std::invalid_argument(msg.str());
  }
  m_ = std::move(m);
}

double StochasticMatrix::max_column_sum_deviation(const Eigen::MatrixXd& m) {
  if (m.cols() == 0) return 0.0;
  return (m.colwise().sum().array() - 1.0).abs().maxCoeff();
}

double StochasticMatrix::min_entry(const Eigen::MatrixXd& m) {
  return m.size() == 0 ? 0.0 : m.minCoeff();
}

bool StochasticMatrix::is_column_stochastic(const Eigen::MatrixXd& m,
                                            double column_sum_tol,
                                            double entry_tol) {
  if (m.size() == 0) return false;
  return min_entry(m) >= -entry_tol &&
         max_column_sum_deviation(m) <= column_sum_tol;
}

}  // namespace latentact
