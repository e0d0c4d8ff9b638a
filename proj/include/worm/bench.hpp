#pragma once

#include "worm/baselines.hpp"
#include "worm/model.hpp"
#include "worm/subspace.hpp"
#include "worm/synthetic.hpp"
#include "worm/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace worm {

/// One benchmarked classifier with its hyperparameters. Only the fields
/// belonging to `kind` are consulted.
struct ClassifierSpec {
  enum class Kind { Worm, Knn, Svm, Omp, NearestSubspace, UnionSubspace };

  Kind kind = Kind::Worm;

  double worm_tau = 0.95;
  DecisionVariant worm_variant = DecisionVariant::WeightedAbs;

  int knn_k = 1;

  double svm_reg = 1e-3;
  int svm_epochs = 20;

  int omp_atoms = 4;

  DecisionRule rule;  // nearest-subspace, union-subspace and omp decisions
  SolverKind union_solver = SolverKind::LeastSquares;
  RegularizationParams union_params;

  /// Name used in reports, e.g. "worm" or "linear-SVM (stand-in)".
  std::string display_name() const;
};

struct ExperimentConfig {
  GeneratorConfig generator;  // its seed field is ignored; trials are seeded
                              // from master_seed via derive_seed
  std::vector<NoiseSpec> noise_sweep;
  std::vector<ClassifierSpec> classifiers;
  int trials = 1;
  std::uint64_t master_seed = 0;
  std::string output_dir = ".";
  std::string format = "csv";
  /// Worker threads for per-trial parallelism; results are merged in a fixed
  /// order, so the thread count never changes the output.
  int threads = 1;
  /// When false (default) the wall_time_ms column is written as 0 so that
  /// report files are byte-identical across runs.
  bool emit_timings = false;
};

struct BenchmarkRow {
  std::string classifier_name;
  std::string noise_kind;
  double noise_level = 0.0;
  double mean_snr_db = 0.0;
  double mean_accuracy = 0.0;
  double accuracy_stddev = 0.0;
  int trials = 0;  // completed trials; 0 marks a failed cell
  double wall_time_ms = 0.0;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
};

/// Parses the flat key = value experiment config format. Unknown keys are
/// errors. See the README for the key list.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& text, const std::string& origin);

/// Runs every (classifier, noise level) cell for every trial. Trial t uses
/// seed derive_seed(master_seed, t), so the clean geometry is shared across
/// the sweep within one trial. A classifier failure turns that cell into an
/// error row (trials = 0, NaN metrics) without aborting the run. Rows are
/// ordered classifier-major in config order, then sweep order.
BenchmarkReport run_experiment(const ExperimentConfig& config);

enum class ReportFormat { Csv, Tsv, JsonLines };

/// Fixed header and column order, numbers with 6 significant digits,
/// newline-terminated. JSON lines encode non-finite numbers as the strings
/// "inf", "-inf" and "nan".
void emit_report(const BenchmarkReport& report, ReportFormat format,
                 const std::string& path);

/// One (noise_level, mean_accuracy) series per classifier per noise kind,
/// sorted by level ascending, in gnuplot-style blocks.
void emit_plot_data(const BenchmarkReport& report, const std::string& path);

const char* report_format_name(ReportFormat format);
std::optional<ReportFormat> parse_report_format(const std::string& name);
/// File extension (without dot) for a report format.
const char* report_format_extension(ReportFormat format);

/// Format a double the way report emitters do: "%.6g", non-finite values as
/// inf/-inf/nan.
std::string format_report_number(double value);

}  // namespace worm
