#include "worm/subspace.hpp"

#include <cmath>
#include <memory>

namespace worm {

Index RawClassDictionaries::total_atoms() const {
  Index total = 0;
  for (const auto& d : per_class) {
    total += d.cols();
  }
  return total;
}

double vector_alpha_norm(const Vector& v, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ContractError("decision rule: alpha must be finite and > 0");
  }
  if (alpha == 2.0) {
    return v.norm();
  }
  double sum = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    sum += std::pow(std::abs(v(i)), alpha);
  }
  return std::pow(sum, 1.0 / alpha);
}

RawClassDictionaries fit_raw_dictionaries(const LabeledDataset& train) {
  validate_dataset(train);

  std::vector<Index> counts(static_cast<std::size_t>(train.num_classes), 0);
  for (int label : train.labels) {
    ++counts[static_cast<std::size_t>(label)];
  }

  RawClassDictionaries dicts;
  dicts.per_class.reserve(counts.size());
  for (int c = 0; c < train.num_classes; ++c) {
    dicts.per_class.emplace_back(train.data.rows(), counts[static_cast<std::size_t>(c)]);
  }

  std::vector<Index> next(counts.size(), 0);
  for (Index j = 0; j < train.data.cols(); ++j) {
    const auto c = static_cast<std::size_t>(train.labels[static_cast<std::size_t>(j)]);
    dicts.per_class[c].col(next[c]++) = train.data.col(j);
  }
  return dicts;
}

namespace {

void check_query(const RawClassDictionaries& dicts, const Vector& query) {
  if (dicts.num_classes() < 2) {
    throw ContractError("classify: at least two class dictionaries required");
  }
  for (const auto& d : dicts.per_class) {
    if (d.rows() != dicts.rows() || d.cols() < 1) {
      throw ContractError("classify: malformed class dictionary");
    }
  }
  if (query.size() != dicts.rows()) {
    throw ContractError("classify: query has length " + std::to_string(query.size()) +
                        ", expected " + std::to_string(dicts.rows()));
  }
  require_finite(query, "classify: query");
}

// Smallest index wins on exact ties.
int argbest(const Vector& scores, bool larger_wins) {
  int best = 0;
  for (int c = 1; c < scores.size(); ++c) {
    const bool improves =
        larger_wins ? scores(c) > scores(best) : scores(c) < scores(best);
    if (improves) {
      best = c;
    }
  }
  return best;
}

int decide_nearest(const RawClassDictionaries& dicts,
                   const std::vector<SvdSolver>& solvers, const Vector& query,
                   const DecisionRule& rule) {
  const int num_classes = dicts.num_classes();
  Vector scores(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    const CoefficientVector sol = solvers[static_cast<std::size_t>(c)].least_squares(query);
    scores(c) = rule.kind == DecisionKind::CoefficientNorm
                    ? vector_alpha_norm(sol.values, rule.alpha)
                    : sol.residual_norm;
  }
  return argbest(scores, rule.kind == DecisionKind::CoefficientNorm);
}

DataMatrix concatenate(const RawClassDictionaries& dicts, std::vector<Index>& offsets) {
  offsets.assign(1, 0);
  for (const auto& d : dicts.per_class) {
    offsets.push_back(offsets.back() + d.cols());
  }
  DataMatrix all(dicts.rows(), offsets.back());
  for (std::size_t c = 0; c < dicts.per_class.size(); ++c) {
    all.middleCols(offsets[c], dicts.per_class[c].cols()) = dicts.per_class[c];
  }
  return all;
}

CoefficientVector run_solver(const DataMatrix& A, const Vector& x, const SolverSpec& spec) {
  switch (spec.kind) {
    case SolverKind::LeastSquares:
      return solve_least_squares(A, x);
    case SolverKind::Ridge:
      return solve_ridge(A, x, spec.params.ridge_lambda);
    case SolverKind::Lasso:
      return solve_lasso(A, x, spec.params.lasso_lambda, spec.params.tol,
                         spec.params.max_iter);
    case SolverKind::ElasticNet:
      return solve_elastic_net(A, x, spec.params.elastic_lambda1,
                               spec.params.elastic_lambda2, spec.params.tol,
                               spec.params.max_iter);
    case SolverKind::Omp:
      return solve_omp(A, x, spec.omp_atoms);
  }
  throw ContractError("classify: unknown solver kind");
}

int decide_union(const RawClassDictionaries& dicts, const std::vector<Index>& offsets,
                 const Vector& query, const Vector& coeffs, const DecisionRule& rule) {
  const int num_classes = dicts.num_classes();
  Vector scores(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    const auto sc = static_cast<std::size_t>(c);
    const auto block = coeffs.segment(offsets[sc], offsets[sc + 1] - offsets[sc]);
    if (rule.kind == DecisionKind::CoefficientNorm) {
      scores(c) = vector_alpha_norm(block, rule.alpha);
    } else {
      scores(c) = (query - dicts.per_class[sc] * block).norm();
    }
  }
  return argbest(scores, rule.kind == DecisionKind::CoefficientNorm);
}

}  // namespace

int classify_nearest_subspace(const RawClassDictionaries& dicts, const Vector& query,
                              const DecisionRule& rule) {
  check_query(dicts, query);
  std::vector<SvdSolver> solvers;
  solvers.reserve(dicts.per_class.size());
  for (const auto& d : dicts.per_class) {
    solvers.emplace_back(d);
  }
  return decide_nearest(dicts, solvers, query, rule);
}

std::vector<int> classify_nearest_subspace_batch(const RawClassDictionaries& dicts,
                                                 const DataMatrix& queries,
                                                 const DecisionRule& rule) {
  std::vector<SvdSolver> solvers;
  solvers.reserve(dicts.per_class.size());
  for (const auto& d : dicts.per_class) {
    solvers.emplace_back(d);
  }
  std::vector<int> labels(static_cast<std::size_t>(queries.cols()));
  for (Index j = 0; j < queries.cols(); ++j) {
    const Vector q = queries.col(j);
    check_query(dicts, q);
    labels[static_cast<std::size_t>(j)] = decide_nearest(dicts, solvers, q, rule);
  }
  return labels;
}

int classify_union_subspace(const RawClassDictionaries& dicts, const Vector& query,
                            const SolverSpec& solver, const DecisionRule& rule) {
  check_query(dicts, query);
  std::vector<Index> offsets;
  const DataMatrix all = concatenate(dicts, offsets);
  const CoefficientVector sol = run_solver(all, query, solver);
  return decide_union(dicts, offsets, query, sol.values, rule);
}

std::vector<int> classify_union_subspace_batch(const RawClassDictionaries& dicts,
                                               const DataMatrix& queries,
                                               const SolverSpec& solver,
                                               const DecisionRule& rule) {
  std::vector<Index> offsets;
  const DataMatrix all = concatenate(dicts, offsets);

  // Least-squares and ridge reuse one factorization for the whole batch.
  std::unique_ptr<SvdSolver> shared;
  if (solver.kind == SolverKind::LeastSquares || solver.kind == SolverKind::Ridge) {
    shared = std::make_unique<SvdSolver>(all);
  }

  std::vector<int> labels(static_cast<std::size_t>(queries.cols()));
  for (Index j = 0; j < queries.cols(); ++j) {
    const Vector q = queries.col(j);
    check_query(dicts, q);
    CoefficientVector sol;
    if (solver.kind == SolverKind::LeastSquares) {
      sol = shared->least_squares(q);
    } else if (solver.kind == SolverKind::Ridge) {
      sol = shared->ridge(q, solver.params.ridge_lambda);
    } else {
      sol = run_solver(all, q, solver);
    }
    labels[static_cast<std::size_t>(j)] = decide_union(dicts, offsets, q, sol.values, rule);
  }
  return labels;
}

const char* decision_kind_name(DecisionKind kind) {
  return kind == DecisionKind::CoefficientNorm ? "coefficient_norm" : "residual";
}

const char* solver_kind_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::LeastSquares:
      return "least_squares";
    case SolverKind::Ridge:
      return "ridge";
    case SolverKind::Lasso:
      return "lasso";
    case SolverKind::ElasticNet:
      return "elastic_net";
    case SolverKind::Omp:
      return "omp";
  }
  return "unknown";
}

std::optional<DecisionKind> parse_decision_kind(const std::string& name) {
  if (name == "coefficient_norm") return DecisionKind::CoefficientNorm;
  if (name == "residual" || name == "reconstruction_residual") {
    return DecisionKind::ReconstructionResidual;
  }
  return std::nullopt;
}

std::optional<SolverKind> parse_solver_kind(const std::string& name) {
  if (name == "least_squares") return SolverKind::LeastSquares;
  if (name == "ridge") return SolverKind::Ridge;
  if (name == "lasso") return SolverKind::Lasso;
  if (name == "elastic_net") return SolverKind::ElasticNet;
  if (name == "omp") return SolverKind::Omp;
  return std::nullopt;
}

}  // namespace worm
