#pragma once

#include "worm/types.hpp"

#include <Eigen/SVD>

#include <vector>

namespace worm {

/// Knobs for the penalized solvers. Lambdas follow the objectives
///   ridge:        |x - As|^2 + ridge_lambda |s|^2
///   lasso:        |x - As|^2 + lasso_lambda |s|_1
///   elastic net:  |x - As|^2 + elastic_lambda1 |s|_1 + elastic_lambda2 |s|^2
struct RegularizationParams {
  double ridge_lambda = 0.0;
  double lasso_lambda = 0.0;
  double elastic_lambda1 = 0.0;
  double elastic_lambda2 = 0.0;
  double tol = 1e-8;
  int max_iter = 10000;
};

inline constexpr double kDefaultCdTol = 1e-8;
inline constexpr int kDefaultCdMaxIter = 10000;
inline constexpr double kDefaultOmpTol = 1e-10;

/// sign(z) * max(|z| - threshold, 0)
double soft_threshold(double z, double threshold);

/// Thin-SVD factorization of a dictionary, reusable across many right-hand
/// sides. Backs both the plain and the ridge solves; directions whose
/// singular value falls below rank_tol (relative to the largest) count as
/// null space for the plain least-squares solve.
class SvdSolver {
 public:
  static constexpr double kDefaultRankTol = 1e-13;

  explicit SvdSolver(const DataMatrix& A, double rank_tol = kDefaultRankTol);

  /// Minimum-norm least-squares solution.
  CoefficientVector least_squares(const Vector& x) const;
  /// (A^T A + lambda I)^{-1} A^T x; lambda = 0 degrades to least_squares.
  CoefficientVector ridge(const Vector& x, double lambda) const;

  bool rank_deficient() const { return rank_ < singular_values_.size(); }
  Index rank() const { return rank_; }
  const Vector& singular_values() const { return singular_values_; }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  Index rank_ = 0;
  DataMatrix u_;  // m x p
  DataMatrix v_;  // n x p
  Vector singular_values_;
};

/// Minimum-norm minimizer of |x - As|_2, computed through an orthogonal
/// decomposition of A rather than the normal equations.
CoefficientVector solve_least_squares(const DataMatrix& A, const Vector& x);

/// Ridge regression. lambda = 0 on a singular system falls back to the
/// minimum-norm least-squares solution (documented behavior, not an error).
CoefficientVector solve_ridge(const DataMatrix& A, const Vector& x, double lambda);

/// Cyclic coordinate descent on |x - As|^2 + lambda |s|_1. Converged when
/// the largest coordinate change in a sweep drops below tol; otherwise the
/// best iterate is returned with converged = false.
CoefficientVector solve_lasso(const DataMatrix& A, const Vector& x, double lambda,
                              double tol = kDefaultCdTol, int max_iter = kDefaultCdMaxIter);

/// Cyclic coordinate descent on |x - As|^2 + lambda1 |s|_1 + lambda2 |s|^2.
/// lambda1 = 0 reduces to ridge, lambda2 = 0 to lasso.
CoefficientVector solve_elastic_net(const DataMatrix& A, const Vector& x, double lambda1,
                                    double lambda2, double tol = kDefaultCdTol,
                                    int max_iter = kDefaultCdMaxIter);

/// Greedy orthogonal matching pursuit selecting at most max_atoms columns.
/// Selection correlates the residual against unit-normalized columns; the
/// reported coefficients refer to the original columns, and after every
/// selection the residual is re-projected onto the span of all chosen
/// columns. Stops early once the residual norm drops below tol. When
/// selection_order is non-null it receives the chosen column indices in
/// selection order.
CoefficientVector solve_omp(const DataMatrix& A, const Vector& x, int max_atoms,
                            double tol = kDefaultOmpTol,
                            std::vector<Index>* selection_order = nullptr);

}  // namespace worm
