#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "latentact/numeric.hpp"
#include "latentact/rng.hpp"
#include "test_util.hpp"

using namespace latentact;

TEST_CASE("simplex projection fixes points already on the simplex") {
  Rng rng(derive_seed(7, "proj"));
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::VectorXd x = rng.simplex_uniform(5);
    const Eigen::VectorXd p = project_to_simplex(x);
    CHECK((p - x).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("simplex projection returns feasible nearest points") {
  Rng rng(derive_seed(8, "proj2"));
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd x = rng.normal_vector(6);
    const Eigen::VectorXd p = project_to_simplex(x);
    CHECK(p.minCoeff() >= 0.0);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
    // Projection optimality: no feasible random candidate is closer.
    for (int probe = 0; probe < 20; ++probe) {
      const Eigen::VectorXd q = rng.simplex_uniform(6);
      CHECK((x - p).squaredNorm() <= (x - q).squaredNorm() + 1e-10);
    }
  }
}

TEST_CASE("simplex least squares solves the constrained problem exactly") {
  Rng rng(derive_seed(9, "sls"));
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXd A = test_util::random_stochastic(6, 3, rng);
    const Eigen::VectorXd target = rng.simplex_uniform(3);
    const Eigen::VectorXd b = A * target;
    const Eigen::VectorXd x = simplex_least_squares(A, b);
    // Exact data: the residual must vanish and (full column rank) recover the
    // target coefficients.
    CHECK((A * x - b).norm() < 1e-9);
    CHECK(x.minCoeff() >= -1e-12);
    CHECK(x.sum() == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("simplex least squares beats random feasible candidates") {
  Rng rng(derive_seed(10, "sls2"));
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd A(4, 3);
    for (Eigen::Index i = 0; i < A.size(); ++i) A(i) = rng.normal();
    const Eigen::VectorXd b = rng.normal_vector(4);
    const Eigen::VectorXd x = simplex_least_squares(A, b);
    const double obj = (A * x - b).squaredNorm();
    for (int probe = 0; probe < 50; ++probe) {
      const Eigen::VectorXd q = rng.simplex_uniform(3);
      CHECK(obj <= (A * q - b).squaredNorm() + 1e-9);
    }
  }
}

TEST_CASE("nnls matches projection onto a ray and onto the orthant") {
  // Single column: least squares onto the ray through a.
  Eigen::MatrixXd a(3, 1);
  a << 1.0, 2.0, 2.0;
  Eigen::VectorXd b(3);
  b << 3.0, 0.0, 0.0;
  const Eigen::VectorXd x = nnls(a, b);
  CHECK(x(0) == doctest::Approx(3.0 / 9.0).epsilon(1e-10));

  // Negative correlation: solution must be zero.
  Eigen::VectorXd b2(3);
  b2 << -1.0, -1.0, -1.0;
  const Eigen::VectorXd x2 = nnls(a, b2);
  CHECK(x2(0) == 0.0);
}

TEST_CASE("nnls reaches zero residual for points inside the cone") {
  Rng rng(derive_seed(11, "nnls"));
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd A(5, 4);
    for (Eigen::Index i = 0; i < A.size(); ++i) A(i) = rng.uniform();
    Eigen::VectorXd theta(4);
    for (int i = 0; i < 4; ++i) theta(i) = rng.uniform();
    const Eigen::VectorXd b = A * theta;
    const Eigen::VectorXd x = nnls(A, b);
    CHECK((A * x - b).norm() < 1e-8);
    CHECK(x.minCoeff() >= 0.0);
  }
}

TEST_CASE("numerical rank") {
  CHECK(numerical_rank(Eigen::MatrixXd::Identity(3, 3), 1e-9) == 3);
  Eigen::MatrixXd m(3, 2);
  m.col(0) << 1.0, 0.0, 0.0;
  m.col(1) << 2.0, 0.0, 0.0;
  CHECK(numerical_rank(m, 1e-9) == 1);
  CHECK_THROWS_AS(numerical_rank(Eigen::MatrixXd(), 1e-9), std::invalid_argument);
}

TEST_CASE("tv distance") {
  Eigen::VectorXd p(2), q(2);
  p << 1.0, 0.0;
  q << 0.0, 1.0;
  CHECK(tv_distance(p, q) == doctest::Approx(1.0));
  CHECK(tv_distance(p, p) == 0.0);
}

TEST_CASE("permutation helpers") {
  int count = 0;
  for_each_permutation(4, [&](const std::vector<int>&) { ++count; });
  CHECK(count == 24);
  CHECK_THROWS_AS(for_each_permutation(10, [](const std::vector<int>&) {}),
                  std::invalid_argument);

  const std::vector<int> perm{2, 0, 1};
  const std::vector<int> inv = invert_permutation(perm);
  CHECK(compose_permutations(perm, inv) == std::vector<int>{0, 1, 2});
  CHECK(compose_permutations(inv, perm) == std::vector<int>{0, 1, 2});

  Eigen::MatrixXd m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const Eigen::MatrixXd pc = permute_columns(m, perm);
  CHECK(pc(0, 0) == 3);
  CHECK(pc(0, 1) == 1);
  const Eigen::MatrixXd pr = permute_rows(m.transpose(), perm);
  CHECK(pr(0, 0) == 3);
}

TEST_CASE("rng determinism and basic statistics") {
  Rng a(derive_seed(5, "stream"));
  Rng b(derive_seed(5, "stream"));
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng c(derive_seed(5, "other"));
  double mean = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) mean += c.uniform();
  mean /= n;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.02));

  double var = 0.0;
  Rng d(derive_seed(6, "normal"));
  for (int i = 0; i < n; ++i) {
    const double z = d.normal();
    var += z * z;
  }
  CHECK(var / n == doctest::Approx(1.0).epsilon(0.05));
}
