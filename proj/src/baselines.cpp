#include "worm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace worm {

KnnModel fit_knn(LabeledDataset train, int k) {
  validate_dataset(train);
  if (k < 1 || static_cast<Index>(k) > train.size()) {
    throw ContractError("knn: k must be in 1.." + std::to_string(train.size()));
  }
  return KnnModel{std::move(train), k};
}

int knn_classify(const KnnModel& model, const Vector& query) {
  if (query.size() != model.train.dim()) {
    throw ContractError("knn: query dimension mismatch");
  }
  require_finite(query, "knn: query");

  const Index n = model.train.size();
  Vector dists(n);
  for (Index i = 0; i < n; ++i) {
    dists(i) = (model.train.data.col(i) - query).squaredNorm();
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (dists(a) != dists(b)) return dists(a) < dists(b);
    return a < b;
  });

  std::vector<int> votes(static_cast<std::size_t>(model.train.num_classes), 0);
  for (int i = 0; i < model.k; ++i) {
    ++votes[static_cast<std::size_t>(
        model.train.labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])])];
  }
  int best = 0;
  for (int c = 1; c < model.train.num_classes; ++c) {
    if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) {
      best = c;
    }
  }
  return best;
}

std::vector<int> knn_classify_batch(const KnnModel& model, const DataMatrix& queries) {
  std::vector<int> labels(static_cast<std::size_t>(queries.cols()));
  for (Index j = 0; j < queries.cols(); ++j) {
    labels[static_cast<std::size_t>(j)] = knn_classify(model, queries.col(j));
  }
  return labels;
}

namespace {

// Hinge objective of a one-vs-rest stack at the given weights.
double ovr_objective(const LabeledDataset& train, double reg, const DataMatrix& weights,
                     const Vector& bias) {
  const auto num_samples = static_cast<double>(train.size());
  double total = 0.0;
  for (int c = 0; c < train.num_classes; ++c) {
    total += 0.5 * reg * weights.col(c).squaredNorm();
    double hinge_sum = 0.0;
    for (Index i = 0; i < train.size(); ++i) {
      const double y = train.labels[static_cast<std::size_t>(i)] == c ? 1.0 : -1.0;
      const double margin = y * (weights.col(c).dot(train.data.col(i)) + bias(c));
      hinge_sum += std::max(0.0, 1.0 - margin);
    }
    total += hinge_sum / num_samples;
  }
  return total;
}

}  // namespace

LinearSvmModel fit_linear_svm(const LabeledDataset& train, double reg, int epochs,
                              std::uint64_t seed) {
  validate_dataset(train);
  if (!(reg > 0.0) || !std::isfinite(reg)) {
    throw ContractError("svm: regularization constant must be finite and > 0");
  }
  if (epochs < 1) {
    throw ContractError("svm: epochs must be >= 1");
  }

  const Index m = train.dim();
  const Index n = train.size();
  const int num_classes = train.num_classes;

  DataMatrix w = DataMatrix::Zero(m, num_classes);
  Vector b = Vector::Zero(num_classes);
  DataMatrix w_sum = DataMatrix::Zero(m, num_classes);
  Vector b_sum = Vector::Zero(num_classes);

  std::vector<std::mt19937_64> rngs;
  rngs.reserve(static_cast<std::size_t>(num_classes));
  for (int c = 0; c < num_classes; ++c) {
    rngs.emplace_back(derive_seed(seed, static_cast<std::uint64_t>(c)));
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::vector<long> steps(static_cast<std::size_t>(num_classes), 0);

  LinearSvmModel model;
  model.reg = reg;
  model.epochs = epochs;
  model.seed = seed;
  model.epoch_loss.reserve(static_cast<std::size_t>(epochs));

  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (int c = 0; c < num_classes; ++c) {
      const auto sc = static_cast<std::size_t>(c);
      std::iota(order.begin(), order.end(), Index{0});
      std::shuffle(order.begin(), order.end(), rngs[sc]);
      for (Index i : order) {
        ++steps[sc];
        // 1/t decay keeps the averaged iterate settled; reg enters through
        // the shrinkage factor below rather than the schedule.
        const double eta = 1.0 / (1.0 + static_cast<double>(steps[sc]));
        const double y = train.labels[static_cast<std::size_t>(i)] == c ? 1.0 : -1.0;
        const double margin = y * (w.col(c).dot(train.data.col(i)) + b(c));
        w.col(c) *= 1.0 - eta * reg;
        if (margin < 1.0) {
          w.col(c) += eta * y * train.data.col(i);
          b(c) += eta * y;
        }
        w_sum.col(c) += w.col(c);
        b_sum(c) += b(c);
      }
    }
    const double inv_steps = 1.0 / static_cast<double>(steps[0]);
    model.weights = w_sum * inv_steps;
    model.bias = b_sum * inv_steps;
    model.epoch_loss.push_back(ovr_objective(train, reg, model.weights, model.bias));
  }
  return model;
}

int svm_classify(const LinearSvmModel& model, const Vector& query) {
  if (query.size() != model.weights.rows()) {
    throw ContractError("svm: query dimension mismatch");
  }
  require_finite(query, "svm: query");
  const Vector scores = model.weights.transpose() * query + model.bias;
  int best = 0;
  for (int c = 1; c < scores.size(); ++c) {
    if (scores(c) > scores(best)) {
      best = c;
    }
  }
  return best;
}

std::vector<int> svm_classify_batch(const LinearSvmModel& model, const DataMatrix& queries) {
  std::vector<int> labels(static_cast<std::size_t>(queries.cols()));
  for (Index j = 0; j < queries.cols(); ++j) {
    labels[static_cast<std::size_t>(j)] = svm_classify(model, queries.col(j));
  }
  return labels;
}

int omp_classify(const RawClassDictionaries& dicts, const Vector& query, int max_atoms,
                 const DecisionRule& rule) {
  SolverSpec spec;
  spec.kind = SolverKind::Omp;
  spec.omp_atoms = max_atoms;
  return classify_union_subspace(dicts, query, spec, rule);
}

std::vector<int> omp_classify_batch(const RawClassDictionaries& dicts,
                                    const DataMatrix& queries, int max_atoms,
                                    const DecisionRule& rule) {
  SolverSpec spec;
  spec.kind = SolverKind::Omp;
  spec.omp_atoms = max_atoms;
  return classify_union_subspace_batch(dicts, queries, spec, rule);
}

}  // namespace worm
