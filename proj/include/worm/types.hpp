#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace worm {

/// Dense real matrix whose columns are samples or dictionary atoms.
using DataMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Caller broke an API precondition (dimension mismatch, bad parameter).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input data is malformed (NaN or Inf entries, empty matrix).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Training cannot proceed on the given dataset.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration file or option value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solution of one regression problem: one weight per dictionary atom plus
/// the Euclidean norm of the attained residual.
struct CoefficientVector {
  Vector values;
  double residual_norm = 0.0;
  /// False when an iterative solver hit its sweep limit before reaching tol.
  bool converged = true;
  /// True when the system was numerically rank-deficient and the
  /// minimum-norm solution was substituted.
  bool condition_warning = false;
};

/// Column-sample matrix with one integer class label per column.
/// Labels take values in 0..num_classes-1 and every class is populated.
struct LabeledDataset {
  DataMatrix data;          // m x L
  std::vector<int> labels;  // length L
  int num_classes = 0;

  Index dim() const { return data.rows(); }
  Index size() const { return data.cols(); }
};

void require_finite(const DataMatrix& m, const std::string& what);
void require_finite(const Vector& v, const std::string& what);

/// Checks shape, label range, per-class occupancy (at least two classes,
/// none empty) and entry finiteness.
void validate_dataset(const LabeledDataset& dataset);

/// Deterministic sub-stream derivation: stream i of a master seed is
/// splitmix64(master ^ (i + 1) * 0x9E3779B97F4A7C15). Used wherever one
/// seed has to spawn independent generator streams (per class, per trial,
/// per noise draw) so results do not depend on execution order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace worm
