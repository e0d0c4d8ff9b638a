#include "worm/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace worm {

std::vector<Index> balanced_class_counts(Index total, int num_classes) {
  if (num_classes < 1 || total < 0) {
    throw ContractError("balanced_class_counts: invalid arguments");
  }
  const Index base = total / num_classes;
  const Index remainder = total % num_classes;
  std::vector<Index> counts(static_cast<std::size_t>(num_classes), base);
  for (Index c = 0; c < remainder; ++c) {
    ++counts[static_cast<std::size_t>(c)];
  }
  return counts;
}

namespace {

void validate_noise(const NoiseSpec& noise) {
  if (!std::isfinite(noise.level) || noise.level < 0.0) {
    throw ConfigError("noise level must be finite and >= 0");
  }
  if (noise.kind == NoiseKind::SaltPepper && noise.level > 1.0) {
    throw ConfigError("salt-and-pepper probability must be <= 1");
  }
  if (noise.amplitude && (!std::isfinite(*noise.amplitude) || *noise.amplitude < 0.0)) {
    throw ConfigError("salt-and-pepper amplitude must be finite and >= 0");
  }
}

void validate_config(const GeneratorConfig& config) {
  if (config.dim < 1) {
    throw ConfigError("generator: dim must be >= 1");
  }
  if (config.num_classes < 2) {
    throw ConfigError("generator: at least two classes required");
  }
  if (config.n_train < config.num_classes) {
    throw ConfigError("generator: n_train must be >= num_classes");
  }
  if (config.n_test < 1) {
    throw ConfigError("generator: n_test must be >= 1");
  }
  if (!std::isfinite(config.coeff_min) || !std::isfinite(config.coeff_max) ||
      config.coeff_min >= config.coeff_max) {
    throw ConfigError("generator: coefficient range is empty");
  }
  if (config.coeff_dead_zone < 0.0) {
    throw ConfigError("generator: dead zone must be >= 0");
  }
  // Some mass of [coeff_min, coeff_max] must survive the dead zone.
  if (config.coeff_max <= config.coeff_dead_zone &&
      config.coeff_min >= -config.coeff_dead_zone) {
    throw ConfigError("generator: coefficient range lies inside the dead zone");
  }
  validate_noise(config.noise);
}

double draw_line_parameter(std::mt19937_64& rng, const GeneratorConfig& config) {
  std::uniform_real_distribution<double> dist(config.coeff_min, config.coeff_max);
  for (;;) {
    const double t = dist(rng);
    if (std::abs(t) >= config.coeff_dead_zone) {
      return t;
    }
  }
}

DataMatrix draw_directions(const GeneratorConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  DataMatrix directions(config.dim, config.num_classes);
  for (int c = 0; c < config.num_classes; ++c) {
    for (;;) {
      Vector g(config.dim);
      for (Index i = 0; i < config.dim; ++i) {
        g(i) = normal(rng);
      }
      const double norm = g.norm();
      if (norm > 1e-12) {
        directions.col(c) = g / norm;
        break;
      }
    }
  }
  return directions;
}

void build_set(const GeneratorConfig& config, const DataMatrix& directions, Index count,
               std::uint64_t coeff_seed, DataMatrix& clean, std::vector<int>& labels) {
  const std::vector<Index> counts = balanced_class_counts(count, config.num_classes);
  clean.resize(config.dim, count);
  labels.resize(static_cast<std::size_t>(count));

  std::mt19937_64 rng(coeff_seed);
  Index col = 0;
  for (int c = 0; c < config.num_classes; ++c) {
    for (Index i = 0; i < counts[static_cast<std::size_t>(c)]; ++i, ++col) {
      const double t = draw_line_parameter(rng, config);
      clean.col(col) = t * directions.col(c);
      labels[static_cast<std::size_t>(col)] = c;
    }
  }
}

}  // namespace

GeneratedData generate(const GeneratorConfig& config) {
  validate_config(config);

  const DataMatrix directions = draw_directions(config, derive_seed(config.seed, 1));

  GeneratedData out;
  build_set(config, directions, config.n_train, derive_seed(config.seed, 2),
            out.clean_train, out.train.labels);
  build_set(config, directions, config.n_test, derive_seed(config.seed, 3),
            out.clean_test, out.test.labels);

  out.train.data = apply_noise(out.clean_train, config.noise, derive_seed(config.seed, 4));
  out.test.data = apply_noise(out.clean_test, config.noise, derive_seed(config.seed, 5));
  out.train.num_classes = config.num_classes;
  out.test.num_classes = config.num_classes;
  return out;
}

DataMatrix apply_noise(const DataMatrix& clean, const NoiseSpec& noise, std::uint64_t seed) {
  validate_noise(noise);
  require_finite(clean, "apply_noise: input");
  if (noise.level == 0.0) {
    return clean;
  }

  DataMatrix out = clean;
  std::mt19937_64 rng(seed);
  switch (noise.kind) {
    case NoiseKind::Gaussian: {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Index j = 0; j < out.cols(); ++j) {
        for (Index i = 0; i < out.rows(); ++i) {
          out(i, j) += noise.level * normal(rng);
        }
      }
      break;
    }
    case NoiseKind::SaltPepper: {
      const double amplitude =
          noise.amplitude ? *noise.amplitude : clean.cwiseAbs().maxCoeff();
      const double p = noise.level;
      std::uniform_real_distribution<double> uniform(0.0, 1.0);
      for (Index j = 0; j < out.cols(); ++j) {
        for (Index i = 0; i < out.rows(); ++i) {
          const double u = uniform(rng);
          if (u < p / 2.0) {
            out(i, j) = amplitude;
          } else if (u < p) {
            out(i, j) = -amplitude;
          }
        }
      }
      break;
    }
    case NoiseKind::Multiplicative: {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Index j = 0; j < out.cols(); ++j) {
        for (Index i = 0; i < out.rows(); ++i) {
          out(i, j) *= 1.0 + noise.level * normal(rng);
        }
      }
      break;
    }
  }
  return out;
}

double measure_snr_db(const DataMatrix& clean, const DataMatrix& noisy) {
  if (clean.rows() != noisy.rows() || clean.cols() != noisy.cols()) {
    throw ContractError("measure_snr_db: shape mismatch");
  }
  const double signal = clean.squaredNorm();
  const double noise = (noisy - clean).squaredNorm();
  if (noise == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return 10.0 * std::log10(signal / noise);
}

void write_dataset_csv(const LabeledDataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot open dataset file for writing: " + path);
  }
  char buf[32];
  for (Index j = 0; j < dataset.data.cols(); ++j) {
    std::string line;
    for (Index i = 0; i < dataset.data.rows(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", dataset.data(i, j));
      line += buf;
      line += ',';
    }
    line += std::to_string(dataset.labels[static_cast<std::size_t>(j)]);
    line += '\n';
    out << line;
  }
  out.flush();
  if (!out) {
    throw IoError("failed writing dataset file: " + path);
  }
}

LabeledDataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open dataset file: " + path);
  }

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      try {
        fields.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw IoError(path + ":" + std::to_string(line_no) + ": bad number '" + field + "'");
      }
    }
    if (fields.size() < 2) {
      throw IoError(path + ":" + std::to_string(line_no) + ": need features plus a label");
    }
    const double label = fields.back();
    fields.pop_back();
    if (label < 0 || label != std::floor(label)) {
      throw IoError(path + ":" + std::to_string(line_no) + ": label must be a nonnegative integer");
    }
    if (!rows.empty() && fields.size() != rows.front().size()) {
      throw IoError(path + ":" + std::to_string(line_no) + ": inconsistent feature count");
    }
    rows.push_back(std::move(fields));
    labels.push_back(static_cast<int>(label));
  }
  if (rows.empty()) {
    throw IoError(path + ": no samples");
  }

  LabeledDataset dataset;
  dataset.data.resize(static_cast<Index>(rows.front().size()), static_cast<Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (std::size_t i = 0; i < rows[j].size(); ++i) {
      dataset.data(static_cast<Index>(i), static_cast<Index>(j)) = rows[j][i];
    }
  }
  dataset.labels = std::move(labels);
  dataset.num_classes = 0;
  for (int label : dataset.labels) {
    dataset.num_classes = std::max(dataset.num_classes, label + 1);
  }
  return dataset;
}

const char* noise_kind_name(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::Gaussian:
      return "gaussian";
    case NoiseKind::SaltPepper:
      return "salt_pepper";
    case NoiseKind::Multiplicative:
      return "multiplicative";
  }
  return "unknown";
}

std::optional<NoiseKind> parse_noise_kind(const std::string& name) {
  if (name == "gaussian") return NoiseKind::Gaussian;
  if (name == "salt_pepper") return NoiseKind::SaltPepper;
  if (name == "multiplicative") return NoiseKind::Multiplicative;
  return std::nullopt;
}

}  // namespace worm
