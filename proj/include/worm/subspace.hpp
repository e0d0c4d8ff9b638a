#pragma once

#include "worm/regression.hpp"
#include "worm/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace worm {

/// Per-class dictionaries whose columns are raw training samples.
struct RawClassDictionaries {
  std::vector<DataMatrix> per_class;  // index = class id, each m x n_c

  int num_classes() const { return static_cast<int>(per_class.size()); }
  Index rows() const { return per_class.empty() ? 0 : per_class.front().rows(); }
  Index total_atoms() const;
};

enum class DecisionKind { CoefficientNorm, ReconstructionResidual };

/// How per-class regression results turn into a class decision.
/// CoefficientNorm picks the class with the LARGEST alpha-norm of its
/// coefficient block; ReconstructionResidual picks the class whose
/// reconstruction is closest to the query in Euclidean norm. Exact score
/// ties always go to the smallest class index.
struct DecisionRule {
  DecisionKind kind = DecisionKind::ReconstructionResidual;
  double alpha = 2.0;  // norm order for CoefficientNorm, > 0
};

enum class SolverKind { LeastSquares, Ridge, Lasso, ElasticNet, Omp };

/// Regression backend for the union-of-subspace classifier.
struct SolverSpec {
  SolverKind kind = SolverKind::LeastSquares;
  RegularizationParams params;
  int omp_atoms = 1;
};

/// (sum_i |v_i|^alpha)^(1/alpha) for alpha > 0.
double vector_alpha_norm(const Vector& v, double alpha);

/// Partitions the training columns by label, preserving dataset order.
RawClassDictionaries fit_raw_dictionaries(const LabeledDataset& train);

/// Solves one regression per class dictionary and applies the decision rule
/// to the per-class solutions.
int classify_nearest_subspace(const RawClassDictionaries& dicts, const Vector& query,
                              const DecisionRule& rule);

/// Solves a single regression against the concatenated dictionary
/// [A_0 ... A_{C-1}], slices the solution by the per-class column counts and
/// applies the decision rule block-wise.
int classify_union_subspace(const RawClassDictionaries& dicts, const Vector& query,
                            const SolverSpec& solver, const DecisionRule& rule);

/// Batch variants; these factorize each least-squares system once and reuse
/// it for every query.
std::vector<int> classify_nearest_subspace_batch(const RawClassDictionaries& dicts,
                                                 const DataMatrix& queries,
                                                 const DecisionRule& rule);
std::vector<int> classify_union_subspace_batch(const RawClassDictionaries& dicts,
                                               const DataMatrix& queries,
                                               const SolverSpec& solver,
                                               const DecisionRule& rule);

const char* decision_kind_name(DecisionKind kind);
const char* solver_kind_name(SolverKind kind);
std::optional<DecisionKind> parse_decision_kind(const std::string& name);
std::optional<SolverKind> parse_solver_kind(const std::string& name);

}  // namespace worm
