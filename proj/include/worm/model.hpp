#pragma once

#include "worm/regression.hpp"
#include "worm/subspace.hpp"
#include "worm/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace worm {

/// Orthonormal basis for one class: the leading left singular vectors of the
/// class's raw dictionary, together with the matching singular values. The
/// weights are strictly positive and non-increasing; they drive the class
/// decision.
struct ClassDictionary {
  DataMatrix basis;  // m x k, orthonormal columns
  Vector weights;    // k singular values
  int class_id = 0;

  Index components() const { return basis.cols(); }
};

/// WeightedAbs scores a class by sum_i |coeff_i| * weight_i (default,
/// invariant to the arbitrary sign of singular vectors); WeightedSigned
/// uses the raw signed sum.
enum class DecisionVariant { WeightedAbs, WeightedSigned };

struct WormOptions {
  double energy_threshold = 0.95;  // tau in (0, 1]
  DecisionVariant variant = DecisionVariant::WeightedAbs;
  /// Subtract each class's mean column before the SVD. Off by default:
  /// class subspaces pass through the origin.
  bool center_classes = false;
};

/// Fitted weighted-orthogonal-regression classifier: one ClassDictionary per
/// class plus the cached concatenated dictionary and its block layout.
struct WormModel {
  std::vector<ClassDictionary> dictionaries;
  double energy_threshold = 0.95;
  DecisionVariant variant = DecisionVariant::WeightedAbs;

  // Derived at assembly time.
  DataMatrix assembled;              // m x (sum k_c), [D_0 ... D_{C-1}]
  std::vector<Index> block_offsets;  // size C+1; block c = [offsets[c], offsets[c+1])
  Vector concatenated_weights;       // diagonal of the weight matrix Sigma

  int num_classes() const { return static_cast<int>(dictionaries.size()); }
  Index rows() const { return assembled.rows(); }
  Index total_components() const { return assembled.cols(); }

  /// Validates the dictionary invariants (orthonormal bases, positive
  /// non-increasing weights, class ids 0..C-1 in order), concatenates the
  /// bases and caches the block layout.
  static WormModel assemble(std::vector<ClassDictionary> dictionaries,
                            double energy_threshold, DecisionVariant variant);
};

/// Tolerance used to verify basis orthonormality at assembly/load time.
inline constexpr double kOrthonormalityTol = 1e-10;
/// Singular values below this fraction of the largest are discarded before
/// the energy accounting.
inline constexpr double kSingularValueDiscardTol = 1e-12;
/// Relative singular-value cutoff below which the assembled dictionary is
/// treated as numerically singular (near-identical class subspaces).
inline constexpr double kAssembledRankTol = 1e-10;

/// SVD of one class's raw dictionary, keeping the smallest leading set of
/// components whose squared singular values reach the fraction tau of the
/// total energy. Singular values below kSingularValueDiscardTol times the
/// largest are dropped before the accounting.
ClassDictionary select_basis(const DataMatrix& class_columns, double tau, int class_id,
                             bool center = false);

/// Builds raw per-class dictionaries, selects a basis per class and
/// assembles the model. Fails when the retained components exceed the
/// feature dimension (the closed-form regression needs sum k_c <= m).
WormModel fit_worm(const LabeledDataset& train, const WormOptions& options = {});

/// Least-squares coefficients of y against the assembled dictionary,
/// computed through an orthogonal decomposition. A numerically singular
/// system yields the minimum-norm solution with condition_warning set.
CoefficientVector worm_regress(const WormModel& model, const Vector& y);

struct Decision {
  int label = 0;
  Vector scores;  // one per class
};

/// Slices the coefficients by class block and scores each class by its
/// weight-weighted coefficient sum; ties go to the smallest class index.
Decision worm_decide(const WormModel& model, const CoefficientVector& coeffs);

int classify_worm(const WormModel& model, const Vector& y);
std::vector<int> classify_worm_batch(const WormModel& model, const DataMatrix& queries);

/// Regression against the column-rescaled dictionary D diag(w)^{-1}. The
/// solution equals diag(w) times the plain solution against D, which makes
/// the weighted decision expressible as a retrained dictionary.
CoefficientVector scaled_dictionary_regress(const DataMatrix& dictionary,
                                            const Vector& weights, const Vector& y);

/// scaled_dictionary_regress applied to the model's assembled dictionary and
/// concatenated weights.
CoefficientVector equivalence_transform(const WormModel& model, const Vector& y);

/// Binary model file: magic, format version, dimensions, tau, variant and
/// the per-class bases and weights. Stored values round-trip bit-exactly.
void save_model(const WormModel& model, const std::string& path);
WormModel load_model(const std::string& path);

const char* decision_variant_name(DecisionVariant variant);
std::optional<DecisionVariant> parse_decision_variant(const std::string& name);

}  // namespace worm
