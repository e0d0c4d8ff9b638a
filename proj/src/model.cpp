#include "worm/model.hpp"

#include <Eigen/SVD>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <utility>

namespace worm {

ClassDictionary select_basis(const DataMatrix& class_columns, double tau, int class_id,
                             bool center) {
  if (class_columns.rows() < 1 || class_columns.cols() < 1) {
    throw ContractError("select_basis: empty class matrix");
  }
  if (!(tau > 0.0) || !(tau <= 1.0)) {
    throw ContractError("select_basis: energy threshold must lie in (0, 1]");
  }
  require_finite(class_columns, "select_basis: class matrix");

  DataMatrix centered;
  const DataMatrix* input = &class_columns;
  if (center) {
    centered = class_columns.colwise() - class_columns.rowwise().mean().eval();
    input = &centered;
  }

  Eigen::BDCSVD<DataMatrix> svd(*input, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  const double max_sv = sv.size() > 0 ? sv(0) : 0.0;
  if (max_sv <= 0.0) {
    throw FitError("select_basis: class " + std::to_string(class_id) +
                   " has an all-zero dictionary");
  }

  const double discard_below = kSingularValueDiscardTol * max_sv;
  Index usable = 0;
  double total_energy = 0.0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) < discard_below) {
      break;  // singular values are non-increasing
    }
    total_energy += sv(i) * sv(i);
    ++usable;
  }

  Index k = usable;
  double cumulative = 0.0;
  for (Index i = 0; i < usable; ++i) {
    cumulative += sv(i) * sv(i);
    if (cumulative >= tau * total_energy) {
      k = i + 1;
      break;
    }
  }

  ClassDictionary dict;
  dict.basis = svd.matrixU().leftCols(k);
  dict.weights = sv.head(k);
  dict.class_id = class_id;
  return dict;
}

WormModel WormModel::assemble(std::vector<ClassDictionary> dictionaries,
                              double energy_threshold, DecisionVariant variant) {
  if (dictionaries.size() < 2) {
    throw ContractError("worm model: at least two class dictionaries required");
  }
  if (!(energy_threshold > 0.0) || !(energy_threshold <= 1.0)) {
    throw ContractError("worm model: energy threshold must lie in (0, 1]");
  }

  const Index m = dictionaries.front().basis.rows();
  Index total = 0;
  for (std::size_t c = 0; c < dictionaries.size(); ++c) {
    const ClassDictionary& d = dictionaries[c];
    if (d.class_id != static_cast<int>(c)) {
      throw ContractError("worm model: dictionaries must be ordered by class id");
    }
    if (d.basis.rows() != m || d.basis.cols() < 1) {
      throw ContractError("worm model: class " + std::to_string(c) +
                          " basis has inconsistent shape");
    }
    if (d.weights.size() != d.basis.cols()) {
      throw ContractError("worm model: class " + std::to_string(c) +
                          " weight count does not match basis");
    }
    require_finite(d.basis, "worm model: basis");
    require_finite(d.weights, "worm model: weights");
    for (Index i = 0; i < d.weights.size(); ++i) {
      if (!(d.weights(i) > 0.0)) {
        throw ContractError("worm model: weights must be strictly positive");
      }
      if (i > 0 && d.weights(i) > d.weights(i - 1)) {
        throw ContractError("worm model: weights must be non-increasing");
      }
    }
    const DataMatrix gram = d.basis.transpose() * d.basis;
    const double ortho_err =
        (gram - DataMatrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    if (ortho_err > kOrthonormalityTol) {
      throw ContractError("worm model: class " + std::to_string(c) +
                          " basis is not orthonormal");
    }
    total += d.basis.cols();
  }

  WormModel model;
  model.energy_threshold = energy_threshold;
  model.variant = variant;
  model.assembled.resize(m, total);
  model.block_offsets.assign(1, 0);
  model.concatenated_weights.resize(total);
  for (const ClassDictionary& d : dictionaries) {
    const Index at = model.block_offsets.back();
    model.assembled.middleCols(at, d.basis.cols()) = d.basis;
    model.concatenated_weights.segment(at, d.weights.size()) = d.weights;
    model.block_offsets.push_back(at + d.basis.cols());
  }
  model.dictionaries = std::move(dictionaries);
  return model;
}

WormModel fit_worm(const LabeledDataset& train, const WormOptions& options) {
  const RawClassDictionaries raw = fit_raw_dictionaries(train);

  std::vector<ClassDictionary> dicts;
  dicts.reserve(raw.per_class.size());
  Index total = 0;
  for (int c = 0; c < raw.num_classes(); ++c) {
    dicts.push_back(select_basis(raw.per_class[static_cast<std::size_t>(c)],
                                 options.energy_threshold, c, options.center_classes));
    total += dicts.back().components();
  }
  if (total > train.dim()) {
    throw FitError("fit_worm: " + std::to_string(total) +
                   " retained components exceed the feature dimension " +
                   std::to_string(train.dim()) + "; lower the energy threshold");
  }
  return WormModel::assemble(std::move(dicts), options.energy_threshold, options.variant);
}

CoefficientVector worm_regress(const WormModel& model, const Vector& y) {
  if (y.size() != model.rows()) {
    throw ContractError("worm_regress: query has length " + std::to_string(y.size()) +
                        ", expected " + std::to_string(model.rows()));
  }
  require_finite(y, "worm_regress: query");
  return SvdSolver(model.assembled, kAssembledRankTol).least_squares(y);
}

Decision worm_decide(const WormModel& model, const CoefficientVector& coeffs) {
  if (coeffs.values.size() != model.total_components()) {
    throw ContractError("worm_decide: coefficient count " +
                        std::to_string(coeffs.values.size()) + " does not match model (" +
                        std::to_string(model.total_components()) + ")");
  }

  Decision decision;
  decision.scores.resize(model.num_classes());
  for (int c = 0; c < model.num_classes(); ++c) {
    const auto sc = static_cast<std::size_t>(c);
    const Index at = model.block_offsets[sc];
    const Index len = model.block_offsets[sc + 1] - at;
    double score = 0.0;
    for (Index i = 0; i < len; ++i) {
      const double coeff = coeffs.values(at + i);
      const double weighted = model.variant == DecisionVariant::WeightedAbs
                                  ? std::abs(coeff)
                                  : coeff;
      score += weighted * model.concatenated_weights(at + i);
    }
    decision.scores(c) = score;
  }

  decision.label = 0;
  for (int c = 1; c < model.num_classes(); ++c) {
    if (decision.scores(c) > decision.scores(decision.label)) {
      decision.label = c;
    }
  }
  return decision;
}

int classify_worm(const WormModel& model, const Vector& y) {
  return worm_decide(model, worm_regress(model, y)).label;
}

std::vector<int> classify_worm_batch(const WormModel& model, const DataMatrix& queries) {
  if (queries.rows() != model.rows()) {
    throw ContractError("classify_worm_batch: query dimension mismatch");
  }
  require_finite(queries, "classify_worm_batch: queries");

  const SvdSolver solver(model.assembled, kAssembledRankTol);
  std::vector<int> labels(static_cast<std::size_t>(queries.cols()));
  for (Index j = 0; j < queries.cols(); ++j) {
    const CoefficientVector coeffs = solver.least_squares(queries.col(j));
    labels[static_cast<std::size_t>(j)] = worm_decide(model, coeffs).label;
  }
  return labels;
}

CoefficientVector scaled_dictionary_regress(const DataMatrix& dictionary,
                                            const Vector& weights, const Vector& y) {
  if (weights.size() != dictionary.cols()) {
    throw ContractError("scaled regression: one weight per column required");
  }
  require_finite(weights, "scaled regression: weights");
  for (Index i = 0; i < weights.size(); ++i) {
    if (!(weights(i) > 0.0)) {
      throw ContractError("scaled regression: weights must be strictly positive");
    }
  }
  const DataMatrix rescaled = dictionary * weights.cwiseInverse().asDiagonal();
  if (y.size() != dictionary.rows()) {
    throw ContractError("scaled regression: query dimension mismatch");
  }
  require_finite(y, "scaled regression: query");
  return SvdSolver(rescaled, kAssembledRankTol).least_squares(y);
}

CoefficientVector equivalence_transform(const WormModel& model, const Vector& y) {
  return scaled_dictionary_regress(model.assembled, model.concatenated_weights, y);
}

namespace {

constexpr char kModelMagic[8] = {'W', 'O', 'R', 'M', 'M', 'D', 'L', '1'};
constexpr std::uint32_t kModelVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) {
    buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  }
  out.write(buf, sizeof(buf));
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) {
    buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  }
  out.write(buf, sizeof(buf));
}

void put_f64(std::ostream& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), sizeof(buf));
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  }
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), sizeof(buf));
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  }
  return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void save_model(const WormModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open model file for writing: " + path);
  }
  out.write(kModelMagic, sizeof(kModelMagic));
  put_u32(out, kModelVersion);
  put_u64(out, static_cast<std::uint64_t>(model.rows()));
  put_u32(out, static_cast<std::uint32_t>(model.num_classes()));
  put_f64(out, model.energy_threshold);
  put_u32(out, model.variant == DecisionVariant::WeightedAbs ? 0u : 1u);

  for (const ClassDictionary& d : model.dictionaries) {
    put_u32(out, static_cast<std::uint32_t>(d.class_id));
    put_u64(out, static_cast<std::uint64_t>(d.components()));
    for (Index i = 0; i < d.weights.size(); ++i) {
      put_f64(out, d.weights(i));
    }
    for (Index j = 0; j < d.basis.cols(); ++j) {
      for (Index i = 0; i < d.basis.rows(); ++i) {
        put_f64(out, d.basis(i, j));
      }
    }
  }
  out.flush();
  if (!out) {
    throw IoError("failed writing model file: " + path);
  }
}

WormModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open model file: " + path);
  }
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0) {
    throw IoError("not a worm model file: " + path);
  }
  const std::uint32_t version = get_u32(in);
  if (version != kModelVersion) {
    throw IoError("unsupported model format version " + std::to_string(version) +
                  " in " + path);
  }
  const auto rows = static_cast<Index>(get_u64(in));
  const std::uint32_t num_classes = get_u32(in);
  const double tau = get_f64(in);
  const std::uint32_t variant_code = get_u32(in);
  if (!in || rows < 1 || num_classes < 2 || variant_code > 1) {
    throw IoError("corrupt model header: " + path);
  }

  std::vector<ClassDictionary> dicts;
  dicts.reserve(num_classes);
  for (std::uint32_t c = 0; c < num_classes; ++c) {
    ClassDictionary d;
    d.class_id = static_cast<int>(get_u32(in));
    const auto k = static_cast<Index>(get_u64(in));
    if (!in || k < 1) {
      throw IoError("corrupt class record in model file: " + path);
    }
    d.weights.resize(k);
    for (Index i = 0; i < k; ++i) {
      d.weights(i) = get_f64(in);
    }
    d.basis.resize(rows, k);
    for (Index j = 0; j < k; ++j) {
      for (Index i = 0; i < rows; ++i) {
        d.basis(i, j) = get_f64(in);
      }
    }
    if (!in) {
      throw IoError("truncated model file: " + path);
    }
    dicts.push_back(std::move(d));
  }

  const DecisionVariant variant =
      variant_code == 0 ? DecisionVariant::WeightedAbs : DecisionVariant::WeightedSigned;
  try {
    return WormModel::assemble(std::move(dicts), tau, variant);
  } catch (const ContractError& err) {
    throw IoError("model file " + path + " failed validation: " + err.what());
  }
}

const char* decision_variant_name(DecisionVariant variant) {
  return variant == DecisionVariant::WeightedAbs ? "weighted_abs" : "weighted_signed";
}

std::optional<DecisionVariant> parse_decision_variant(const std::string& name) {
  if (name == "weighted_abs" || name == "abs") return DecisionVariant::WeightedAbs;
  if (name == "weighted_signed" || name == "signed") return DecisionVariant::WeightedSigned;
  return std::nullopt;
}

}  // namespace worm
