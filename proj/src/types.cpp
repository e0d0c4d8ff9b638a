#include "worm/types.hpp"

#include <algorithm>

namespace worm {

void require_finite(const DataMatrix& m, const std::string& what) {
  if (!m.allFinite()) {
    throw InputError(what + ": non-finite entry");
  }
}

void require_finite(const Vector& v, const std::string& what) {
  if (!v.allFinite()) {
    throw InputError(what + ": non-finite entry");
  }
}

void validate_dataset(const LabeledDataset& dataset) {
  if (dataset.data.rows() < 1 || dataset.data.cols() < 1) {
    throw ContractError("dataset: data matrix is empty");
  }
  if (static_cast<Index>(dataset.labels.size()) != dataset.data.cols()) {
    throw ContractError("dataset: label count does not match sample count");
  }
  if (dataset.num_classes < 2) {
    throw FitError("dataset: at least two classes required, got " +
                   std::to_string(dataset.num_classes));
  }
  require_finite(dataset.data, "dataset");

  std::vector<Index> counts(static_cast<std::size_t>(dataset.num_classes), 0);
  for (int label : dataset.labels) {
    if (label < 0 || label >= dataset.num_classes) {
      throw ContractError("dataset: label " + std::to_string(label) +
                          " outside 0.." + std::to_string(dataset.num_classes - 1));
    }
    ++counts[static_cast<std::size_t>(label)];
  }
  for (int c = 0; c < dataset.num_classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) {
      throw FitError("dataset: class " + std::to_string(c) + " has no samples");
    }
  }
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ ((stream + 1) * 0x9E3779B97F4A7C15ULL));
}

}  // namespace worm
