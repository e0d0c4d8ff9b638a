#include "worm/regression.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace worm {

namespace {

void check_system(const DataMatrix& A, const Vector& x) {
  if (A.rows() < 1 || A.cols() < 1) {
    throw ContractError("regression: dictionary matrix is empty");
  }
  if (x.size() != A.rows()) {
    throw ContractError("regression: right-hand side has length " +
                        std::to_string(x.size()) + ", expected " +
                        std::to_string(A.rows()));
  }
  require_finite(A, "regression: dictionary");
  require_finite(x, "regression: right-hand side");
}

void check_penalty(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw ContractError(std::string("regression: ") + name + " must be finite and >= 0");
  }
}

}  // namespace

double soft_threshold(double z, double threshold) {
  if (z > threshold) return z - threshold;
  if (z < -threshold) return z + threshold;
  return 0.0;
}

SvdSolver::SvdSolver(const DataMatrix& A, double rank_tol)
    : rows_(A.rows()), cols_(A.cols()) {
  Eigen::BDCSVD<DataMatrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  u_ = svd.matrixU();
  v_ = svd.matrixV();
  singular_values_ = svd.singularValues();

  const double max_sv = singular_values_.size() > 0 ? singular_values_(0) : 0.0;
  const double cutoff = rank_tol * max_sv;
  rank_ = 0;
  for (Index i = 0; i < singular_values_.size(); ++i) {
    if (singular_values_(i) > cutoff && singular_values_(i) > 0.0) {
      ++rank_;
    }
  }
}

CoefficientVector SvdSolver::least_squares(const Vector& x) const {
  if (x.size() != rows_) {
    throw ContractError("SvdSolver: right-hand side has wrong length");
  }
  const Vector z = u_.transpose() * x;
  Vector w = Vector::Zero(z.size());
  for (Index i = 0; i < rank_; ++i) {
    w(i) = z(i) / singular_values_(i);
  }
  CoefficientVector out;
  out.values = v_ * w;
  // A s = U (sigma .* w); for the kept directions sigma_i w_i = z_i.
  out.residual_norm = (x - u_.leftCols(rank_) * z.head(rank_)).norm();
  out.condition_warning = rank_deficient();
  return out;
}

CoefficientVector SvdSolver::ridge(const Vector& x, double lambda) const {
  if (lambda == 0.0) {
    return least_squares(x);
  }
  if (x.size() != rows_) {
    throw ContractError("SvdSolver: right-hand side has wrong length");
  }
  const Vector z = u_.transpose() * x;
  Vector w(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    const double sv = singular_values_(i);
    w(i) = sv * z(i) / (sv * sv + lambda);
  }
  CoefficientVector out;
  out.values = v_ * w;
  out.residual_norm = (x - u_ * singular_values_.cwiseProduct(w)).norm();
  return out;
}

CoefficientVector solve_least_squares(const DataMatrix& A, const Vector& x) {
  check_system(A, x);
  return SvdSolver(A).least_squares(x);
}

CoefficientVector solve_ridge(const DataMatrix& A, const Vector& x, double lambda) {
  check_system(A, x);
  check_penalty(lambda, "ridge lambda");
  return SvdSolver(A).ridge(x, lambda);
}

namespace {

// Shared core of the lasso and elastic-net solvers: cyclic coordinate
// descent on |x - As|^2 + l1 |s|_1 + l2 |s|^2.
CoefficientVector coordinate_descent(const DataMatrix& A, const Vector& x, double l1,
                                     double l2, double tol, int max_iter) {
  check_system(A, x);
  check_penalty(l1, "l1 penalty");
  check_penalty(l2, "l2 penalty");
  if (!(tol > 0.0) || !std::isfinite(tol)) {
    throw ContractError("regression: tol must be finite and > 0");
  }
  if (max_iter < 1) {
    throw ContractError("regression: max_iter must be >= 1");
  }

  const Index n = A.cols();
  const Vector col_sq = A.colwise().squaredNorm();
  const double threshold = l1 / 2.0;

  Vector s = Vector::Zero(n);
  Vector r = x;  // r = x - A s
  bool converged = false;

  for (int sweep = 0; sweep < max_iter; ++sweep) {
    double max_delta = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (col_sq(j) == 0.0) {
        continue;  // zero atom never enters the support
      }
      const double c = A.col(j).dot(r) + col_sq(j) * s(j);
      const double s_new = soft_threshold(c, threshold) / (col_sq(j) + l2);
      const double delta = s_new - s(j);
      if (delta != 0.0) {
        r -= A.col(j) * delta;
        s(j) = s_new;
      }
      max_delta = std::max(max_delta, std::abs(delta));
    }
    if (max_delta < tol) {
      converged = true;
      break;
    }
  }

  CoefficientVector out;
  out.values = std::move(s);
  out.residual_norm = (x - A * out.values).norm();
  out.converged = converged;
  return out;
}

}  // namespace

CoefficientVector solve_lasso(const DataMatrix& A, const Vector& x, double lambda,
                              double tol, int max_iter) {
  return coordinate_descent(A, x, lambda, 0.0, tol, max_iter);
}

CoefficientVector solve_elastic_net(const DataMatrix& A, const Vector& x, double lambda1,
                                    double lambda2, double tol, int max_iter) {
  return coordinate_descent(A, x, lambda1, lambda2, tol, max_iter);
}

CoefficientVector solve_omp(const DataMatrix& A, const Vector& x, int max_atoms,
                            double tol, std::vector<Index>* selection_order) {
  check_system(A, x);
  if (max_atoms < 1 || max_atoms > A.cols()) {
    throw ContractError("omp: atom budget must be in 1.." + std::to_string(A.cols()));
  }
  if (!(tol >= 0.0) || !std::isfinite(tol)) {
    throw ContractError("omp: tol must be finite and >= 0");
  }

  const Index n = A.cols();
  const Vector col_norms = A.colwise().norm();

  std::vector<Index> selected;
  selected.reserve(static_cast<std::size_t>(max_atoms));
  std::vector<bool> in_support(static_cast<std::size_t>(n), false);

  Vector r = x;
  Vector active_coeffs;

  for (int step = 0; step < max_atoms; ++step) {
    if (r.norm() < tol) {
      break;
    }
    Index best = -1;
    double best_corr = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (in_support[static_cast<std::size_t>(j)] || col_norms(j) == 0.0) {
        continue;
      }
      const double corr = std::abs(A.col(j).dot(r)) / col_norms(j);
      if (corr > best_corr) {
        best_corr = corr;
        best = j;
      }
    }
    if (best < 0 || best_corr == 0.0) {
      break;  // residual orthogonal to every remaining atom
    }
    selected.push_back(best);
    in_support[static_cast<std::size_t>(best)] = true;

    DataMatrix active(A.rows(), static_cast<Index>(selected.size()));
    for (std::size_t i = 0; i < selected.size(); ++i) {
      active.col(static_cast<Index>(i)) = A.col(selected[i]);
    }
    active_coeffs = SvdSolver(active).least_squares(x).values;
    r = x - active * active_coeffs;
  }

  CoefficientVector out;
  out.values = Vector::Zero(n);
  for (std::size_t i = 0; i < selected.size(); ++i) {
    out.values(selected[i]) = active_coeffs(static_cast<Index>(i));
  }
  out.residual_norm = r.norm();
  if (selection_order != nullptr) {
    *selection_order = std::move(selected);
  }
  return out;
}

}  // namespace worm
