#include "latentact/diversity.hpp"

#include <cmath>
#include <stdexcept>

#include "latentact/numeric.hpp"
#include "latentact/rng.hpp"

namespace latentact {

std::string to_string(DiversityVerdict v) {
  switch (v) {
    case DiversityVerdict::kCertifiedSufficient: return "certified-sufficient";
    case DiversityVerdict::kPlausible: return "plausible";
    case DiversityVerdict::kViolated: return "violated";
    case DiversityVerdict::kInconclusive: return "inconclusive";
  }
  return "unknown";
}

std::pair<int, bool> check_rank(const Eigen::Ref<const Eigen::MatrixXd>& M, int k,
                                double tol) {
  if (tol <= 0.0) throw std::invalid_argument("check_rank: tol must be > 0");
  const int rank = numerical_rank(M, tol);
  return {rank, rank >= k};
}

bool check_separability(const StochasticMatrix& Pi, double tol) {
  if (!(tol > 0.0 && tol < 0.5)) {
    throw std::invalid_argument("check_separability: tol must lie in (0, 0.5)");
  }
  const Eigen::MatrixXd& m = Pi.matrix();
  const int k = int(m.rows());
  for (int a = 0; a < k; ++a) {
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(k);
    unit(a) = 1.0;
    bool found = false;
    for (int e = 0; e < int(m.cols()); ++e) {
      if ((m.col(e) - unit).cwiseAbs().maxCoeff() <= tol) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

double mc_scattered_check(const StochasticMatrix& Pi, int num_samples,
                          std::uint64_t seed, double tol) {
  if (num_samples < 1) {
    throw std::invalid_argument("mc_scattered_check: num_samples must be >= 1");
  }
  const int k = int(Pi.rows());
  if (k == 1) return 1.0;  // vacuous: C_1 is a ray on the simplex itself

  // Boundary points of C_k: x = sqrt((k-1)/k) * 1/sqrt(k) * 1 + (1/sqrt(k)) u
  // with u a unit vector orthogonal to 1; then ||x|| = 1, 1^T x = sqrt(k-1).
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(k);
  const double c_par = std::sqrt(double(k - 1) / double(k)) / std::sqrt(double(k));
  const double c_perp = 1.0 / std::sqrt(double(k));

  Rng rng(derive_seed(seed, "mc-scattered"));
  int passed = 0;
  for (int i = 0; i < num_samples; ++i) {
    Eigen::VectorXd u = rng.normal_vector(k);
    u -= (u.dot(ones) / double(k)) * ones;
    double norm = u.norm();
    while (norm < 1e-12) {
      u = rng.normal_vector(k);
      u -= (u.dot(ones) / double(k)) * ones;
      norm = u.norm();
    }
    u /= norm;
    const Eigen::VectorXd x = c_par * ones + c_perp * u;

    const Eigen::VectorXd theta = nnls(Pi.matrix(), x);
    const double residual = (Pi.matrix() * theta - x).norm();
    if (residual <= tol) ++passed;
  }
  return double(passed) / double(num_samples);
}

DiversityReport diversity_report(const Eigen::Ref<const Eigen::MatrixXd>& P,
                                 const StochasticMatrix& Pi, int k,
                                 const DiversityOptions& opts) {
  if (P.cols() != Pi.cols()) {
    throw std::invalid_argument(
        "diversity_report: P and Pi must have matching column counts");
  }
  DiversityReport report;
  report.k = k;
  report.tolerances = opts;
  report.rank_P = check_rank(P, k, opts.rank_tol).first;
  report.rank_Pi = check_rank(Pi.matrix(), k, opts.rank_tol).first;
  report.separable = check_separability(Pi, opts.separability_tol);
  report.mc_pass_rate =
      mc_scattered_check(Pi, opts.mc_samples, opts.seed, opts.nnls_tol);

  if (report.rank_P < k || report.rank_Pi < k) {
    report.verdict = DiversityVerdict::kViolated;
  } else if (report.separable) {
    report.verdict = DiversityVerdict::kCertifiedSufficient;
  } else if (report.mc_pass_rate >= 1.0) {
    report.verdict = DiversityVerdict::kPlausible;
  } else {
    report.verdict = DiversityVerdict::kInconclusive;
  }
  return report;
}

}  // namespace latentact
