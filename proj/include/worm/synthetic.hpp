#pragma once

#include "worm/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace worm {

enum class NoiseKind { Gaussian, SaltPepper, Multiplicative };

/// One noise model at one level. The meaning of level depends on the kind:
///   Gaussian        additive per-entry stddev
///   SaltPepper      per-entry corruption probability in [0, 1]
///   Multiplicative  stddev of the relative perturbation (entry *= 1 + e)
struct NoiseSpec {
  NoiseKind kind = NoiseKind::Gaussian;
  double level = 0.0;
  /// Salt-and-pepper spike amplitude; defaults to max |entry| of the clean
  /// matrix when unset.
  std::optional<double> amplitude;
};

/// Points on random lines through the origin in dim-dimensional space. Each
/// class owns one unit direction drawn uniformly on the sphere; a sample of
/// class c is t * u_c with t uniform on [coeff_min, coeff_max] outside the
/// dead zone |t| < coeff_dead_zone.
struct GeneratorConfig {
  Index dim = 200;
  int num_classes = 30;
  Index n_train = 200;
  Index n_test = 1000;
  double coeff_min = -1.0;
  double coeff_max = 1.0;
  double coeff_dead_zone = 0.1;
  NoiseSpec noise;
  std::uint64_t seed = 0;
};

struct GeneratedData {
  LabeledDataset train;
  LabeledDataset test;
  DataMatrix clean_train;  // noise-free counterparts, same column order
  DataMatrix clean_test;
};

/// Deterministic per seed: directions, coefficients and noise each use their
/// own sub-stream of config.seed (see derive_seed), so the clean geometry is
/// identical across noise settings at a fixed seed. Columns are grouped by
/// class in ascending order; class counts are as balanced as integer
/// division allows, remainders going to the lowest class indices.
GeneratedData generate(const GeneratorConfig& config);

/// Entry-wise corruption, visiting entries column-major with a fresh
/// mt19937_64 seeded by `seed`. A level of exactly 0 returns the input
/// unchanged.
DataMatrix apply_noise(const DataMatrix& clean, const NoiseSpec& noise, std::uint64_t seed);

/// 10 log10(|clean|_F^2 / |noisy - clean|_F^2); +infinity when equal.
double measure_snr_db(const DataMatrix& clean, const DataMatrix& noisy);

/// Splits `total` into `num_classes` counts differing by at most one,
/// remainders assigned to the lowest class indices.
std::vector<Index> balanced_class_counts(Index total, int num_classes);

/// One sample per row, label in the last column; values printed with enough
/// digits to round-trip doubles exactly. No header row.
void write_dataset_csv(const LabeledDataset& dataset, const std::string& path);
LabeledDataset read_dataset_csv(const std::string& path);

const char* noise_kind_name(NoiseKind kind);
std::optional<NoiseKind> parse_noise_kind(const std::string& name);

}  // namespace worm
