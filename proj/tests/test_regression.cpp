#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracle_helpers.hpp"
#include "worm/regression.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

using worm::DataMatrix;
using worm::Index;
using worm::Vector;

namespace {

DataMatrix column(double a, double b) {
  DataMatrix m(2, 1);
  m << a, b;
  return m;
}

bool bitwise_equal(const Vector& a, const Vector& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST_CASE("least squares: identity system") {
  const DataMatrix A = DataMatrix::Identity(2, 2);
  Vector x(2);
  x << 3.0, 4.0;
  const auto sol = worm::solve_least_squares(A, x);
  CHECK(sol.values(0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(sol.values(1) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(sol.residual_norm == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("least squares: over-determined single column") {
  // (A^T A)^{-1} A^T x = 4 / 2 = 2 by hand; residual (1,3) - 2(1,1) = (-1,1).
  const DataMatrix A = column(1.0, 1.0);
  Vector x(2);
  x << 1.0, 3.0;
  const auto sol = worm::solve_least_squares(A, x);
  CHECK(sol.values.size() == 1);
  CHECK(sol.values(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(sol.residual_norm == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("least squares: rank-deficient system returns minimum-norm solution") {
  DataMatrix A(2, 2);
  A << 1.0, 1.0, 1.0, 1.0;
  Vector x(2);
  x << 2.0, 2.0;
  const auto sol = worm::solve_least_squares(A, x);
  CHECK(sol.values(0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sol.values(1) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sol.residual_norm == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(sol.condition_warning);

  // Cross-check against the Jacobi pseudo-inverse oracle.
  const Vector expected = oracle::pinv_solve(A, x);
  CHECK((sol.values - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("least squares: random rank-deficient instances match the pseudo-inverse oracle") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    const Index m = 12, r = 3, n = 6;
    const DataMatrix A = oracle::random_matrix(rng, m, r) * oracle::random_matrix(rng, r, n);
    const Vector x = oracle::random_vector(rng, m);
    const auto sol = worm::solve_least_squares(A, x);
    const Vector expected = oracle::pinv_solve(A, x);
    CHECK((sol.values - expected).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("least squares: square invertible systems reproduce the data") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const DataMatrix A = oracle::random_matrix(rng, 8, 8);
    const Vector x = oracle::random_vector(rng, 8);
    const auto sol = worm::solve_least_squares(A, x);
    CHECK((A * sol.values - x).cwiseAbs().maxCoeff() <=
          1e-8 * x.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("least squares: contract violations") {
  const DataMatrix A = DataMatrix::Identity(3, 2);
  Vector wrong(2);
  wrong << 1.0, 2.0;
  CHECK_THROWS_AS(worm::solve_least_squares(A, wrong), worm::ContractError);

  Vector bad(3);
  bad << 1.0, std::numeric_limits<double>::quiet_NaN(), 0.0;
  CHECK_THROWS_AS(worm::solve_least_squares(A, bad), worm::InputError);
}

TEST_CASE("ridge: lambda = 0 equals least squares") {
  std::mt19937_64 rng(21);
  const DataMatrix A = oracle::random_matrix(rng, 10, 4);
  const Vector x = oracle::random_vector(rng, 10);
  const auto ls = worm::solve_least_squares(A, x);
  const auto ridge = worm::solve_ridge(A, x, 0.0);
  CHECK((ls.values - ridge.values).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("ridge: scalar closed form") {
  // 2x1 system: s = A^T x / (A^T A + lambda) = 4 / (2 + 2) = 1.
  const DataMatrix A = column(1.0, 1.0);
  Vector x(2);
  x << 1.0, 3.0;
  const auto sol = worm::solve_ridge(A, x, 2.0);
  CHECK(sol.values(0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ridge: matches the explicit normal-equation formula") {
  std::mt19937_64 rng(22);
  for (double lambda : {1e-3, 0.1, 1.0, 25.0}) {
    const DataMatrix A = oracle::random_matrix(rng, 12, 5);
    const Vector x = oracle::random_vector(rng, 12);
    const DataMatrix gram =
        A.transpose() * A + lambda * DataMatrix::Identity(5, 5);
    const Vector expected = gram.ldlt().solve(A.transpose() * x);
    const auto sol = worm::solve_ridge(A, x, lambda);
    CHECK((sol.values - expected).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("ridge: huge lambda shrinks the solution to zero") {
  std::mt19937_64 rng(23);
  const DataMatrix A = oracle::random_matrix(rng, 10, 4);
  const Vector x = oracle::random_vector(rng, 10);
  const auto sol = worm::solve_ridge(A, x, 1e9);
  CHECK(sol.values.norm() <= 1e-6);
}

TEST_CASE("ridge: solution norm is non-increasing in lambda") {
  std::mt19937_64 rng(24);
  const DataMatrix A = oracle::random_matrix(rng, 15, 6);
  const Vector x = oracle::random_vector(rng, 15);
  double previous = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 12; ++i) {
    const double lambda = std::pow(10.0, -4.0 + 0.7 * i);
    const double norm = worm::solve_ridge(A, x, lambda).values.norm();
    CHECK(norm <= previous + 1e-12);
    previous = norm;
  }
}

TEST_CASE("lasso: a large enough penalty kills every coordinate") {
  std::mt19937_64 rng(31);
  const DataMatrix A = oracle::random_matrix(rng, 10, 5);
  const Vector x = oracle::random_vector(rng, 10);
  const double lambda = 2.0 * (A.transpose() * x).cwiseAbs().maxCoeff();
  const auto sol = worm::solve_lasso(A, x, lambda);
  CHECK(sol.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sol.converged);
}

TEST_CASE("lasso: orthonormal design has a soft-threshold closed form") {
  std::mt19937_64 rng(32);
  const DataMatrix Q = oracle::random_orthonormal(rng, 12, 5);
  const Vector x = oracle::random_vector(rng, 12);
  const double lambda = 0.8;
  const auto sol = worm::solve_lasso(Q, x, lambda);
  const Vector correlations = Q.transpose() * x;
  for (Index i = 0; i < 5; ++i) {
    const double expected = worm::soft_threshold(correlations(i), lambda / 2.0);
    CHECK(sol.values(i) == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("lasso: lambda = 0 matches least squares on a well-conditioned system") {
  std::mt19937_64 rng(33);
  const DataMatrix A = oracle::random_matrix(rng, 12, 4);
  const Vector x = oracle::random_vector(rng, 12);
  const auto lasso = worm::solve_lasso(A, x, 0.0);
  const auto ls = worm::solve_least_squares(A, x);
  CHECK((lasso.values - ls.values).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("lasso: objective matches the exhaustive active-set oracle") {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> lambda_dist(0.05, 2.0);
  for (int trial = 0; trial < 60; ++trial) {
    const Index n = 2 + static_cast<Index>(trial % 7);  // up to 8 atoms
    const DataMatrix A = oracle::random_matrix(rng, n + 4, n);
    const Vector x = oracle::random_vector(rng, n + 4);
    const double lambda = lambda_dist(rng);
    const auto sol = worm::solve_lasso(A, x, lambda);
    const double attained = oracle::penalized_objective(A, x, sol.values, lambda, 0.0);
    const double optimal = oracle::penalized_optimum(A, x, lambda, 0.0);
    CHECK(attained <= optimal * (1.0 + 1e-4) + 1e-12);
  }
}

TEST_CASE("lasso: sweep limit reports non-convergence") {
  std::mt19937_64 rng(35);
  const DataMatrix A = oracle::random_matrix(rng, 20, 10);
  const Vector x = oracle::random_vector(rng, 20);
  const auto sol = worm::solve_lasso(A, x, 0.01, 1e-14, 1);
  CHECK_FALSE(sol.converged);
}

TEST_CASE("elastic net: reductions to ridge and lasso") {
  std::mt19937_64 rng(41);
  const DataMatrix A = oracle::random_matrix(rng, 12, 5);
  const Vector x = oracle::random_vector(rng, 12);

  const auto as_ridge = worm::solve_elastic_net(A, x, 0.0, 0.7);
  const auto ridge = worm::solve_ridge(A, x, 0.7);
  CHECK((as_ridge.values - ridge.values).cwiseAbs().maxCoeff() < 1e-8);

  const auto as_lasso = worm::solve_elastic_net(A, x, 0.4, 0.0);
  const auto lasso = worm::solve_lasso(A, x, 0.4);
  CHECK((as_lasso.values - lasso.values).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("elastic net: l1 dominance zeroes the solution for any l2") {
  std::mt19937_64 rng(42);
  const DataMatrix A = oracle::random_matrix(rng, 10, 4);
  const Vector x = oracle::random_vector(rng, 10);
  const double l1 = 2.0 * (A.transpose() * x).cwiseAbs().maxCoeff();
  for (double l2 : {0.0, 0.3, 5.0}) {
    const auto sol = worm::solve_elastic_net(A, x, l1, l2);
    CHECK(sol.values.cwiseAbs().maxCoeff() == 0.0);
    // The oracle confirms zero is optimal: nothing beats the zero objective.
    const double optimal = oracle::penalized_optimum(A, x, l1, l2);
    CHECK(x.squaredNorm() <= optimal * (1.0 + 1e-10));
  }
}

TEST_CASE("elastic net: objective matches the exhaustive oracle") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> lambda_dist(0.05, 1.5);
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = 2 + static_cast<Index>(trial % 5);
    const DataMatrix A = oracle::random_matrix(rng, n + 3, n);
    const Vector x = oracle::random_vector(rng, n + 3);
    const double l1 = lambda_dist(rng);
    const double l2 = lambda_dist(rng);
    const auto sol = worm::solve_elastic_net(A, x, l1, l2);
    const double attained = oracle::penalized_objective(A, x, sol.values, l1, l2);
    const double optimal = oracle::penalized_optimum(A, x, l1, l2);
    CHECK(attained <= optimal * (1.0 + 1e-4) + 1e-12);
  }
}

TEST_CASE("omp: an exact atom is found in one step") {
  std::mt19937_64 rng(51);
  const DataMatrix A = oracle::random_matrix(rng, 10, 6);
  const Vector x = A.col(3);
  std::vector<Index> order;
  const auto sol = worm::solve_omp(A, x, 1, worm::kDefaultOmpTol, &order);
  REQUIRE(order.size() == 1);
  CHECK(order[0] == 3);
  CHECK(sol.values(3) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sol.residual_norm < 1e-10);
}

TEST_CASE("omp: orthogonal columns are selected in decreasing correlation order") {
  std::mt19937_64 rng(52);
  const DataMatrix Q = oracle::random_orthonormal(rng, 12, 5);
  const Vector x = oracle::random_vector(rng, 12);

  std::vector<Index> expected(5);
  const Vector correlations = (Q.transpose() * x).cwiseAbs();
  std::iota(expected.begin(), expected.end(), Index{0});
  std::sort(expected.begin(), expected.end(), [&](Index a, Index b) {
    if (correlations(a) != correlations(b)) return correlations(a) > correlations(b);
    return a < b;
  });

  std::vector<Index> order;
  worm::solve_omp(Q, x, 5, 0.0, &order);
  CHECK(order == expected);
}

TEST_CASE("omp: full budget on a square full-rank system reaches zero residual") {
  std::mt19937_64 rng(53);
  const DataMatrix A = oracle::random_matrix(rng, 6, 6);
  const Vector x = oracle::random_vector(rng, 6);
  const auto omp = worm::solve_omp(A, x, 6);
  const auto ls = worm::solve_least_squares(A, x);
  CHECK(omp.residual_norm < 1e-8);
  CHECK((omp.values - ls.values).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("omp: the residual stays orthogonal to every selected atom at every step") {
  std::mt19937_64 rng(54);
  for (int trial = 0; trial < 25; ++trial) {
    const DataMatrix A = oracle::random_matrix(rng, 20, 10);
    const Vector x = oracle::random_vector(rng, 20);
    for (int budget = 1; budget <= 6; ++budget) {
      std::vector<Index> order;
      const auto sol = worm::solve_omp(A, x, budget, 0.0, &order);
      const Vector residual = x - A * sol.values;
      for (Index atom : order) {
        const double corr = std::abs(A.col(atom).dot(residual)) / A.col(atom).norm();
        CHECK(corr <= 1e-8);
      }
    }
  }
}

TEST_CASE("omp: budget outside 1..n is a contract violation") {
  const DataMatrix A = DataMatrix::Identity(3, 3);
  const Vector x = Vector::Ones(3);
  CHECK_THROWS_AS(worm::solve_omp(A, x, 4), worm::ContractError);
  CHECK_THROWS_AS(worm::solve_omp(A, x, 0), worm::ContractError);
}

TEST_CASE("solvers are bit-for-bit deterministic") {
  std::mt19937_64 rng(61);
  const DataMatrix A = oracle::random_matrix(rng, 14, 6);
  const Vector x = oracle::random_vector(rng, 14);

  CHECK(bitwise_equal(worm::solve_least_squares(A, x).values,
                      worm::solve_least_squares(A, x).values));
  CHECK(bitwise_equal(worm::solve_ridge(A, x, 0.3).values,
                      worm::solve_ridge(A, x, 0.3).values));
  CHECK(bitwise_equal(worm::solve_lasso(A, x, 0.2).values,
                      worm::solve_lasso(A, x, 0.2).values));
  CHECK(bitwise_equal(worm::solve_elastic_net(A, x, 0.2, 0.1).values,
                      worm::solve_elastic_net(A, x, 0.2, 0.1).values));
  CHECK(bitwise_equal(worm::solve_omp(A, x, 3).values, worm::solve_omp(A, x, 3).values));
}
