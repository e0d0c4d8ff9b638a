#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "worm/bench.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using worm::BenchmarkReport;
using worm::BenchmarkRow;
using worm::ClassifierSpec;
using worm::ExperimentConfig;
using worm::NoiseKind;
using worm::ReportFormat;

namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

const char* kSmallConfig = R"(
# small smoke experiment
dim = 30
num_classes = 4
n_train = 28
n_test = 40
trials = 2
master_seed = 7
noise_kinds = gaussian
gaussian_levels = 0, 0.3
classifiers = worm, knn
knn_k = 1
)";

ExperimentConfig small_noiseless_config() {
  ExperimentConfig config;
  config.generator.dim = 30;
  config.generator.num_classes = 4;
  config.generator.n_train = 24;
  config.generator.n_test = 40;
  config.trials = 1;
  config.master_seed = 12;
  config.noise_sweep = {worm::NoiseSpec{NoiseKind::Gaussian, 0.0, {}}};
  ClassifierSpec spec;
  spec.kind = ClassifierSpec::Kind::Worm;
  config.classifiers = {spec};
  return config;
}

BenchmarkReport tiny_report() {
  BenchmarkReport report;
  BenchmarkRow row;
  row.classifier_name = "worm";
  row.noise_kind = "gaussian";
  row.noise_level = 0.05;
  row.mean_snr_db = 12.345678;
  row.mean_accuracy = 0.987654;
  row.accuracy_stddev = 0.00123;
  row.trials = 5;
  row.wall_time_ms = 0.0;
  report.rows.push_back(row);
  return report;
}

}  // namespace

TEST_CASE("config parsing: full round trip of keys") {
  const ExperimentConfig config = worm::parse_experiment_config(kSmallConfig, "test");
  CHECK(config.generator.dim == 30);
  CHECK(config.generator.num_classes == 4);
  CHECK(config.generator.n_train == 28);
  CHECK(config.generator.n_test == 40);
  CHECK(config.trials == 2);
  CHECK(config.master_seed == 7);
  REQUIRE(config.noise_sweep.size() == 2);
  CHECK(config.noise_sweep[0].kind == NoiseKind::Gaussian);
  CHECK(config.noise_sweep[0].level == 0.0);
  CHECK(config.noise_sweep[1].level == 0.3);
  REQUIRE(config.classifiers.size() == 2);
  CHECK(config.classifiers[0].kind == ClassifierSpec::Kind::Worm);
  CHECK(config.classifiers[1].kind == ClassifierSpec::Kind::Knn);
  CHECK(config.classifiers[1].knn_k == 1);
}

TEST_CASE("config parsing: unknown and malformed keys are errors") {
  CHECK_THROWS_AS(worm::parse_experiment_config(
                      "noise_kinds = gaussian\ngaussian_levels = 0\n"
                      "classifiers = worm\nknn_kk = 3\n",
                      "test"),
                  worm::ConfigError);
  CHECK_THROWS_AS(worm::parse_experiment_config(
                      "noise_kinds = gaussian\ngaussian_levels = 0\n"
                      "classifiers = worm\ndim = thirty\n",
                      "test"),
                  worm::ConfigError);
  CHECK_THROWS_AS(worm::parse_experiment_config(
                      "noise_kinds = gaussian\ngaussian_levels = 0\n"
                      "classifiers = perceptron\n",
                      "test"),
                  worm::ConfigError);
  CHECK_THROWS_AS(worm::parse_experiment_config("classifiers = worm\n", "test"),
                  worm::ConfigError);
  CHECK_THROWS_AS(worm::parse_experiment_config(
                      "noise_kinds = gaussian\ngaussian_levels = 0\n"
                      "classifiers = worm\ndim = 20\ndim = 30\n",
                      "test"),
                  worm::ConfigError);
  CHECK_THROWS_AS(worm::load_experiment_config("no_such_config.cfg"), worm::ConfigError);
}

TEST_CASE("emit_report: empty report writes only the header") {
  TempDir dir("worm_bench_empty");
  const std::string path = dir.file("report.csv");
  worm::emit_report(BenchmarkReport{}, ReportFormat::Csv, path);
  CHECK(read_file(path) ==
        "classifier,noise_kind,noise_level,mean_snr_db,mean_accuracy,"
        "accuracy_stddev,trials,wall_time_ms\n");
}

TEST_CASE("emit_report: one row renders as two lines with 6 significant digits") {
  TempDir dir("worm_bench_one");
  const std::string path = dir.file("report.csv");
  worm::emit_report(tiny_report(), ReportFormat::Csv, path);
  const std::string contents = read_file(path);
  CHECK(contents ==
        "classifier,noise_kind,noise_level,mean_snr_db,mean_accuracy,"
        "accuracy_stddev,trials,wall_time_ms\n"
        "worm,gaussian,0.05,12.3457,0.987654,0.00123,5,0\n");

  const std::string tsv_path = dir.file("report.tsv");
  worm::emit_report(tiny_report(), ReportFormat::Tsv, tsv_path);
  CHECK(read_file(tsv_path).find('\t') != std::string::npos);
}

TEST_CASE("emit_report: json lines round-trip the report") {
  TempDir dir("worm_bench_jsonl");
  BenchmarkReport report = tiny_report();
  BenchmarkRow infinite = report.rows[0];
  infinite.noise_level = 0.0;
  infinite.mean_snr_db = std::numeric_limits<double>::infinity();
  report.rows.insert(report.rows.begin(), infinite);

  const std::string path = dir.file("report.jsonl");
  worm::emit_report(report, ReportFormat::JsonLines, path);

  std::ifstream in(path);
  REQUIRE(in);
  std::string line;
  BenchmarkReport parsed;
  const auto token = [](const nlohmann::json& value) -> std::string {
    if (value.is_string()) return value.get<std::string>();
    return worm::format_report_number(value.get<double>());
  };
  while (std::getline(in, line)) {
    const auto object = nlohmann::json::parse(line);
    BenchmarkRow row;
    row.classifier_name = object.at("classifier").get<std::string>();
    row.noise_kind = object.at("noise_kind").get<std::string>();
    row.trials = object.at("trials").get<int>();
    const std::size_t i = parsed.rows.size();
    CHECK(row.classifier_name == report.rows[i].classifier_name);
    CHECK(row.noise_kind == report.rows[i].noise_kind);
    CHECK(row.trials == report.rows[i].trials);
    CHECK(token(object.at("noise_level")) ==
          worm::format_report_number(report.rows[i].noise_level));
    CHECK(token(object.at("mean_snr_db")) ==
          worm::format_report_number(report.rows[i].mean_snr_db));
    CHECK(token(object.at("mean_accuracy")) ==
          worm::format_report_number(report.rows[i].mean_accuracy));
    CHECK(token(object.at("accuracy_stddev")) ==
          worm::format_report_number(report.rows[i].accuracy_stddev));
    parsed.rows.push_back(row);
  }
  CHECK(parsed.rows.size() == report.rows.size());
}

TEST_CASE("emit_plot_data: sorted series, one point per report row") {
  BenchmarkReport report;
  for (const char* name : {"worm", "knn"}) {
    for (double level : {0.4, 0.0, 0.2}) {  // deliberately unsorted
      BenchmarkRow row;
      row.classifier_name = name;
      row.noise_kind = "gaussian";
      row.noise_level = level;
      row.mean_accuracy = 1.0 - level;
      row.trials = 1;
      report.rows.push_back(row);
    }
  }

  TempDir dir("worm_bench_plot");
  const std::string path = dir.file("plot.dat");
  worm::emit_plot_data(report, path);
  const std::string contents = read_file(path);

  std::size_t points = 0;
  std::size_t series = 0;
  double previous = -1.0;
  std::stringstream ss(contents);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) {
      previous = -1.0;
      continue;
    }
    if (line.front() == '#') {
      if (line.find("classifier:") != std::string::npos) {
        ++series;
        previous = -1.0;
      }
      continue;
    }
    std::stringstream fields(line);
    double level = 0.0, accuracy = 0.0;
    fields >> level >> accuracy;
    CHECK(level > previous);  // ascending within a series
    previous = level;
    ++points;
  }
  CHECK(series == 2);
  CHECK(points == report.rows.size());
}

TEST_CASE("run_experiment: noiseless lines are fully separable by worm") {
  const ExperimentConfig config = small_noiseless_config();
  const BenchmarkReport report = worm::run_experiment(config);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].mean_accuracy == 1.0);
  CHECK(report.rows[0].accuracy_stddev == 0.0);  // single trial
  CHECK(report.rows[0].trials == 1);
  CHECK(report.rows[0].mean_snr_db == std::numeric_limits<double>::infinity());
  CHECK(report.rows[0].wall_time_ms == 0.0);  // timings disabled by default
}

TEST_CASE("run_experiment: failed cells become error rows without aborting the run") {
  ExperimentConfig config = small_noiseless_config();
  // One worm entry that cannot fit: tau = 1 forces more components than dims.
  config.generator.dim = 4;
  config.generator.num_classes = 2;
  config.generator.n_train = 12;
  config.generator.n_test = 10;
  config.generator.noise.level = 0.2;
  config.noise_sweep = {worm::NoiseSpec{NoiseKind::Gaussian, 0.2, {}}};
  ClassifierSpec failing;
  failing.kind = ClassifierSpec::Kind::Worm;
  failing.worm_tau = 1.0;
  ClassifierSpec knn;
  knn.kind = ClassifierSpec::Kind::Knn;
  config.classifiers = {failing, knn};

  const BenchmarkReport report = worm::run_experiment(config);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].trials == 0);
  CHECK(std::isnan(report.rows[0].mean_accuracy));
  CHECK(report.rows[1].trials == 1);
  CHECK(report.rows[1].mean_accuracy > 0.0);
}

TEST_CASE("run_experiment: byte-identical reports, sequential equals parallel") {
  ExperimentConfig config = worm::parse_experiment_config(kSmallConfig, "test");
  config.trials = 4;

  TempDir dir("worm_bench_determinism");
  const BenchmarkReport first = worm::run_experiment(config);
  worm::emit_report(first, ReportFormat::Csv, dir.file("a.csv"));
  const BenchmarkReport second = worm::run_experiment(config);
  worm::emit_report(second, ReportFormat::Csv, dir.file("b.csv"));
  CHECK(read_file(dir.file("a.csv")) == read_file(dir.file("b.csv")));

  config.threads = 4;
  const BenchmarkReport parallel = worm::run_experiment(config);
  worm::emit_report(parallel, ReportFormat::Csv, dir.file("c.csv"));
  CHECK(read_file(dir.file("a.csv")) == read_file(dir.file("c.csv")));

  worm::emit_plot_data(first, dir.file("a.dat"));
  worm::emit_plot_data(parallel, dir.file("c.dat"));
  CHECK(read_file(dir.file("a.dat")) == read_file(dir.file("c.dat")));
}

TEST_CASE("run_experiment: accuracy does not improve from zero to heavy noise") {
  ExperimentConfig config;
  config.generator.dim = 30;
  config.generator.num_classes = 4;
  config.generator.n_train = 28;
  config.generator.n_test = 60;
  config.generator.coeff_min = 0.2;  // one-sided cone per class
  config.trials = 5;
  config.master_seed = 21;
  config.noise_sweep = {worm::NoiseSpec{NoiseKind::Gaussian, 0.0, {}},
                        worm::NoiseSpec{NoiseKind::Gaussian, 1.5, {}}};

  for (auto kind : {ClassifierSpec::Kind::Worm, ClassifierSpec::Kind::Knn,
                    ClassifierSpec::Kind::Svm, ClassifierSpec::Kind::Omp,
                    ClassifierSpec::Kind::NearestSubspace,
                    ClassifierSpec::Kind::UnionSubspace}) {
    ClassifierSpec spec;
    spec.kind = kind;
    spec.omp_atoms = 2;
    config.classifiers.push_back(spec);
  }

  const BenchmarkReport report = worm::run_experiment(config);
  REQUIRE(report.rows.size() == config.classifiers.size() * 2);
  for (std::size_t c = 0; c < config.classifiers.size(); ++c) {
    const BenchmarkRow& clean = report.rows[c * 2];
    const BenchmarkRow& noisy = report.rows[c * 2 + 1];
    REQUIRE(clean.trials == 5);
    REQUIRE(noisy.trials == 5);
    CHECK(clean.mean_accuracy >= noisy.mean_accuracy);
    CHECK(clean.mean_snr_db > noisy.mean_snr_db);
  }
}

TEST_CASE("run_experiment: rejects empty configurations") {
  ExperimentConfig config = small_noiseless_config();
  config.noise_sweep.clear();
  CHECK_THROWS_AS(worm::run_experiment(config), worm::ConfigError);

  ExperimentConfig no_classifiers = small_noiseless_config();
  no_classifiers.classifiers.clear();
  CHECK_THROWS_AS(worm::run_experiment(no_classifiers), worm::ConfigError);
}
