#pragma once

#include "worm/subspace.hpp"
#include "worm/types.hpp"

#include <cstdint>
#include <vector>

namespace worm {

struct KnnModel {
  LabeledDataset train;
  int k = 1;
};

KnnModel fit_knn(LabeledDataset train, int k);

/// Majority vote among the k training columns nearest in Euclidean
/// distance. Distance ties break to the lower training index; vote ties
/// break to the smallest class label among the tied classes.
int knn_classify(const KnnModel& model, const Vector& query);
std::vector<int> knn_classify_batch(const KnnModel& model, const DataMatrix& queries);

/// One-vs-rest linear hinge-loss classifier trained with seeded stochastic
/// subgradient descent. The stored weights are the averaged iterates, which
/// makes training deterministic and smooth enough to track by epoch.
struct LinearSvmModel {
  DataMatrix weights;  // m x C, one column per class
  Vector bias;         // C
  double reg = 1e-3;
  int epochs = 0;
  std::uint64_t seed = 0;
  /// Full one-vs-rest objective of the averaged iterate after each epoch.
  std::vector<double> epoch_loss;
};

LinearSvmModel fit_linear_svm(const LabeledDataset& train, double reg, int epochs,
                              std::uint64_t seed);
int svm_classify(const LinearSvmModel& model, const Vector& query);
std::vector<int> svm_classify_batch(const LinearSvmModel& model, const DataMatrix& queries);

/// Union-of-subspace classification with the OMP solver and at most
/// max_atoms selected training columns.
int omp_classify(const RawClassDictionaries& dicts, const Vector& query, int max_atoms,
                 const DecisionRule& rule);
std::vector<int> omp_classify_batch(const RawClassDictionaries& dicts,
                                    const DataMatrix& queries, int max_atoms,
                                    const DecisionRule& rule);

}  // namespace worm
