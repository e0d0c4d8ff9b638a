#include "worm/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace worm {

std::string ClassifierSpec::display_name() const {
  switch (kind) {
    case Kind::Worm:
      return "worm";
    case Kind::Knn:
      return "knn";
    case Kind::Svm:
      return "linear-SVM (stand-in)";
    case Kind::Omp:
      return "omp";
    case Kind::NearestSubspace:
      return "nearest_subspace";
    case Kind::UnionSubspace:
      return "union_subspace";
  }
  return "unknown";
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) {
      items.push_back(item);
    }
  }
  return items;
}

class KeyValueFile {
 public:
  KeyValueFile(const std::string& text, std::string origin) : origin_(std::move(origin)) {
    std::stringstream ss(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
      ++line_no;
      const std::string stripped = trim(line);
      if (stripped.empty() || stripped.front() == '#') {
        continue;
      }
      const auto eq = stripped.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(origin_ + ":" + std::to_string(line_no) +
                          ": expected 'key = value'");
      }
      const std::string key = trim(stripped.substr(0, eq));
      const std::string value = trim(stripped.substr(eq + 1));
      if (key.empty()) {
        throw ConfigError(origin_ + ":" + std::to_string(line_no) + ": empty key");
      }
      if (values_.count(key) != 0) {
        throw ConfigError(origin_ + ": duplicate key '" + key + "'");
      }
      values_[key] = value;
    }
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string take(const std::string& key, const std::string& fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) {
      return fallback;
    }
    const std::string value = it->second;
    values_.erase(it);
    return value;
  }

  std::string take_required(const std::string& key) {
    const auto it = values_.find(key);
    if (it == values_.end()) {
      throw ConfigError(origin_ + ": missing required key '" + key + "'");
    }
    const std::string value = it->second;
    values_.erase(it);
    return value;
  }

  double take_double(const std::string& key, double fallback) {
    return parse_double(key, take(key, format_double(fallback)));
  }

  long take_long(const std::string& key, long fallback) {
    const std::string raw = take(key, std::to_string(fallback));
    try {
      std::size_t used = 0;
      const long v = std::stol(raw, &used);
      if (used != raw.size()) throw std::invalid_argument(raw);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(origin_ + ": key '" + key + "': bad integer '" + raw + "'");
    }
  }

  std::uint64_t take_u64(const std::string& key, std::uint64_t fallback) {
    const std::string raw = take(key, std::to_string(fallback));
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(raw, &used);
      if (used != raw.size()) throw std::invalid_argument(raw);
      return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
      throw ConfigError(origin_ + ": key '" + key + "': bad integer '" + raw + "'");
    }
  }

  double parse_double(const std::string& key, const std::string& raw) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(raw, &used);
      if (used != raw.size()) throw std::invalid_argument(raw);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(origin_ + ": key '" + key + "': bad number '" + raw + "'");
    }
  }

  void fail_on_leftovers() const {
    if (!values_.empty()) {
      throw ConfigError(origin_ + ": unknown key '" + values_.begin()->first + "'");
    }
  }

  const std::string& origin() const { return origin_; }

 private:
  static std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
  }

  std::string origin_;
  std::map<std::string, std::string> values_;
};

DecisionRule take_rule(KeyValueFile& kv, const std::string& rule_key,
                       const std::string& alpha_key) {
  DecisionRule rule;
  const std::string name = kv.take(rule_key, "residual");
  const auto kind = parse_decision_kind(name);
  if (!kind) {
    throw ConfigError(kv.origin() + ": key '" + rule_key + "': unknown rule '" + name + "'");
  }
  rule.kind = *kind;
  rule.alpha = kv.take_double(alpha_key, 2.0);
  if (!(rule.alpha > 0.0)) {
    throw ConfigError(kv.origin() + ": key '" + alpha_key + "' must be > 0");
  }
  return rule;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& origin) {
  KeyValueFile kv(text, origin);
  ExperimentConfig config;

  config.generator.dim = kv.take_long("dim", 200);
  config.generator.num_classes = static_cast<int>(kv.take_long("num_classes", 30));
  config.generator.n_train = kv.take_long("n_train", 200);
  config.generator.n_test = kv.take_long("n_test", 1000);
  config.generator.coeff_min = kv.take_double("coeff_min", -1.0);
  config.generator.coeff_max = kv.take_double("coeff_max", 1.0);
  config.generator.coeff_dead_zone = kv.take_double("coeff_dead_zone", 0.1);

  config.master_seed = kv.take_u64("master_seed", 0);
  config.trials = static_cast<int>(kv.take_long("trials", 1));
  config.output_dir = kv.take("output_dir", ".");
  config.format = kv.take("format", "csv");
  if (!parse_report_format(config.format)) {
    throw ConfigError(origin + ": key 'format': unknown format '" + config.format + "'");
  }

  std::optional<double> sp_amplitude;
  const std::string amp_raw = kv.take("salt_pepper_amplitude", "auto");
  if (amp_raw != "auto") {
    sp_amplitude = kv.parse_double("salt_pepper_amplitude", amp_raw);
  }

  const std::vector<std::string> kinds = split_list(kv.take_required("noise_kinds"));
  if (kinds.empty()) {
    throw ConfigError(origin + ": key 'noise_kinds' must list at least one kind");
  }
  for (const std::string& kind_name : kinds) {
    const auto kind = parse_noise_kind(kind_name);
    if (!kind) {
      throw ConfigError(origin + ": unknown noise kind '" + kind_name + "'");
    }
    const std::string levels_key = kind_name + "_levels";
    const std::vector<std::string> levels = split_list(kv.take_required(levels_key));
    if (levels.empty()) {
      throw ConfigError(origin + ": key '" + levels_key + "' must list at least one level");
    }
    for (const std::string& level_raw : levels) {
      NoiseSpec spec;
      spec.kind = *kind;
      spec.level = kv.parse_double(levels_key, level_raw);
      if (*kind == NoiseKind::SaltPepper) {
        spec.amplitude = sp_amplitude;
      }
      config.noise_sweep.push_back(spec);
    }
  }
  // Level lists for kinds that are not swept are legal and ignored.
  for (const char* key : {"gaussian_levels", "salt_pepper_levels", "multiplicative_levels"}) {
    kv.take(key, "");
  }

  const DecisionRule omp_rule = take_rule(kv, "omp_rule", "omp_alpha");
  const DecisionRule nearest_rule = take_rule(kv, "nearest_rule", "nearest_alpha");
  const DecisionRule union_rule = take_rule(kv, "union_rule", "union_alpha");

  const std::string variant_name = kv.take("worm_variant", "weighted_abs");
  const auto variant = parse_decision_variant(variant_name);
  if (!variant) {
    throw ConfigError(origin + ": key 'worm_variant': unknown variant '" + variant_name + "'");
  }
  const double worm_tau = kv.take_double("worm_tau", 0.95);
  const int knn_k = static_cast<int>(kv.take_long("knn_k", 1));
  const double svm_reg = kv.take_double("svm_reg", 1e-3);
  const int svm_epochs = static_cast<int>(kv.take_long("svm_epochs", 20));
  const int omp_k = static_cast<int>(kv.take_long("omp_k", 4));

  const std::string union_solver_name = kv.take("union_solver", "least_squares");
  const auto union_solver = parse_solver_kind(union_solver_name);
  if (!union_solver) {
    throw ConfigError(origin + ": key 'union_solver': unknown solver '" +
                      union_solver_name + "'");
  }
  RegularizationParams union_params;
  union_params.ridge_lambda = kv.take_double("union_ridge_lambda", 0.0);
  union_params.lasso_lambda = kv.take_double("union_lasso_lambda", 0.0);
  union_params.elastic_lambda1 = kv.take_double("union_elastic_lambda1", 0.0);
  union_params.elastic_lambda2 = kv.take_double("union_elastic_lambda2", 0.0);
  const int union_omp_k = static_cast<int>(kv.take_long("union_omp_k", omp_k));

  const std::vector<std::string> classifier_names = split_list(kv.take_required("classifiers"));
  if (classifier_names.empty()) {
    throw ConfigError(origin + ": key 'classifiers' must list at least one classifier");
  }
  for (const std::string& name : classifier_names) {
    ClassifierSpec spec;
    if (name == "worm") {
      spec.kind = ClassifierSpec::Kind::Worm;
      spec.worm_tau = worm_tau;
      spec.worm_variant = *variant;
    } else if (name == "knn") {
      spec.kind = ClassifierSpec::Kind::Knn;
      spec.knn_k = knn_k;
    } else if (name == "svm") {
      spec.kind = ClassifierSpec::Kind::Svm;
      spec.svm_reg = svm_reg;
      spec.svm_epochs = svm_epochs;
    } else if (name == "omp") {
      spec.kind = ClassifierSpec::Kind::Omp;
      spec.omp_atoms = omp_k;
      spec.rule = omp_rule;
    } else if (name == "nearest_subspace") {
      spec.kind = ClassifierSpec::Kind::NearestSubspace;
      spec.rule = nearest_rule;
    } else if (name == "union_subspace") {
      spec.kind = ClassifierSpec::Kind::UnionSubspace;
      spec.union_solver = *union_solver;
      spec.union_params = union_params;
      spec.omp_atoms = union_omp_k;
      spec.rule = union_rule;
    } else {
      throw ConfigError(origin + ": unknown classifier '" + name + "'");
    }
    config.classifiers.push_back(spec);
  }

  kv.fail_on_leftovers();

  if (config.trials < 1) {
    throw ConfigError(origin + ": trials must be >= 1");
  }
  return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str(), path);
}

namespace {

struct CellOutcome {
  double accuracy = 0.0;
  double snr_db = 0.0;
  double wall_ms = 0.0;
  bool ok = false;
};

double score_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == truth[i]) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

double fit_and_score(const ClassifierSpec& spec, const GeneratedData& data,
                     std::uint64_t trial_seed) {
  std::vector<int> predicted;
  switch (spec.kind) {
    case ClassifierSpec::Kind::Worm: {
      WormOptions options;
      options.energy_threshold = spec.worm_tau;
      options.variant = spec.worm_variant;
      const WormModel model = fit_worm(data.train, options);
      predicted = classify_worm_batch(model, data.test.data);
      break;
    }
    case ClassifierSpec::Kind::Knn: {
      const KnnModel model = fit_knn(data.train, spec.knn_k);
      predicted = knn_classify_batch(model, data.test.data);
      break;
    }
    case ClassifierSpec::Kind::Svm: {
      const LinearSvmModel model =
          fit_linear_svm(data.train, spec.svm_reg, spec.svm_epochs,
                         derive_seed(trial_seed, 11));
      predicted = svm_classify_batch(model, data.test.data);
      break;
    }
    case ClassifierSpec::Kind::Omp: {
      const RawClassDictionaries dicts = fit_raw_dictionaries(data.train);
      predicted = omp_classify_batch(dicts, data.test.data, spec.omp_atoms, spec.rule);
      break;
    }
    case ClassifierSpec::Kind::NearestSubspace: {
      const RawClassDictionaries dicts = fit_raw_dictionaries(data.train);
      predicted = classify_nearest_subspace_batch(dicts, data.test.data, spec.rule);
      break;
    }
    case ClassifierSpec::Kind::UnionSubspace: {
      const RawClassDictionaries dicts = fit_raw_dictionaries(data.train);
      SolverSpec solver;
      solver.kind = spec.union_solver;
      solver.params = spec.union_params;
      solver.omp_atoms = spec.omp_atoms;
      predicted = classify_union_subspace_batch(dicts, data.test.data, solver, spec.rule);
      break;
    }
  }
  return score_accuracy(predicted, data.test.labels);
}

// SNR over train and test combined.
double combined_snr_db(const GeneratedData& data) {
  const double signal = data.clean_train.squaredNorm() + data.clean_test.squaredNorm();
  const double noise = (data.train.data - data.clean_train).squaredNorm() +
                       (data.test.data - data.clean_test).squaredNorm();
  if (noise == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return 10.0 * std::log10(signal / noise);
}

}  // namespace

BenchmarkReport run_experiment(const ExperimentConfig& config) {
  if (config.trials < 1) {
    throw ConfigError("experiment: trials must be >= 1");
  }
  if (config.noise_sweep.empty()) {
    throw ConfigError("experiment: noise sweep is empty");
  }
  if (config.classifiers.empty()) {
    throw ConfigError("experiment: classifier list is empty");
  }

  const std::size_t num_sweep = config.noise_sweep.size();
  const std::size_t num_cls = config.classifiers.size();
  const auto num_trials = static_cast<std::size_t>(config.trials);

  // outcomes[t * num_sweep * num_cls + s * num_cls + c]
  std::vector<CellOutcome> outcomes(num_trials * num_sweep * num_cls);

  const auto run_trial = [&](std::size_t t) {
    const std::uint64_t trial_seed = derive_seed(config.master_seed, t);
    for (std::size_t s = 0; s < num_sweep; ++s) {
      GeneratorConfig gen = config.generator;
      gen.noise = config.noise_sweep[s];
      gen.seed = trial_seed;
      const GeneratedData data = generate(gen);
      const double snr = combined_snr_db(data);

      for (std::size_t c = 0; c < num_cls; ++c) {
        CellOutcome& cell = outcomes[(t * num_sweep + s) * num_cls + c];
        cell.snr_db = snr;
        const auto start = std::chrono::steady_clock::now();
        try {
          cell.accuracy = fit_and_score(config.classifiers[c], data, trial_seed);
          cell.ok = true;
        } catch (const std::exception& err) {
          std::cerr << "bench: " << config.classifiers[c].display_name() << " at "
                    << noise_kind_name(config.noise_sweep[s].kind) << " level "
                    << config.noise_sweep[s].level << " (trial " << t
                    << ") failed: " << err.what() << "\n";
        }
        cell.wall_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
      }
    }
  };

  const int worker_count =
      std::max(1, std::min<int>(config.threads, static_cast<int>(num_trials)));
  if (worker_count == 1) {
    for (std::size_t t = 0; t < num_trials; ++t) {
      run_trial(t);
    }
  } else {
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(worker_count));
    for (int w = 0; w < worker_count; ++w) {
      workers.emplace_back([&, w]() {
        try {
          for (std::size_t t = static_cast<std::size_t>(w); t < num_trials;
               t += static_cast<std::size_t>(worker_count)) {
            run_trial(t);
          }
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& worker : workers) {
      worker.join();
    }
    for (const auto& err : errors) {
      if (err) {
        std::rethrow_exception(err);
      }
    }
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  BenchmarkReport report;
  report.rows.reserve(num_cls * num_sweep);
  for (std::size_t c = 0; c < num_cls; ++c) {
    for (std::size_t s = 0; s < num_sweep; ++s) {
      BenchmarkRow row;
      row.classifier_name = config.classifiers[c].display_name();
      row.noise_kind = noise_kind_name(config.noise_sweep[s].kind);
      row.noise_level = config.noise_sweep[s].level;

      bool all_ok = true;
      double acc_sum = 0.0;
      double snr_sum = 0.0;
      double wall_sum = 0.0;
      for (std::size_t t = 0; t < num_trials; ++t) {
        const CellOutcome& cell = outcomes[(t * num_sweep + s) * num_cls + c];
        all_ok = all_ok && cell.ok;
        acc_sum += cell.accuracy;
        snr_sum += cell.snr_db;
        wall_sum += cell.wall_ms;
      }
      if (!all_ok) {
        row.mean_snr_db = nan;
        row.mean_accuracy = nan;
        row.accuracy_stddev = nan;
        row.trials = 0;
      } else {
        const auto n = static_cast<double>(num_trials);
        row.mean_accuracy = acc_sum / n;
        row.mean_snr_db = snr_sum / n;
        if (num_trials > 1) {
          double sq_sum = 0.0;
          for (std::size_t t = 0; t < num_trials; ++t) {
            const double d =
                outcomes[(t * num_sweep + s) * num_cls + c].accuracy - row.mean_accuracy;
            sq_sum += d * d;
          }
          row.accuracy_stddev = std::sqrt(sq_sum / (n - 1.0));
        }
        row.trials = config.trials;
      }
      row.wall_time_ms = config.emit_timings ? wall_sum : 0.0;
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

std::string format_report_number(double value) {
  if (std::isnan(value)) {
    return "nan";
  }
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

namespace {

std::string json_number(double value) {
  if (!std::isfinite(value)) {
    return "\"" + format_report_number(value) + "\"";
  }
  return format_report_number(value);
}

}  // namespace

void emit_report(const BenchmarkReport& report, ReportFormat format,
                 const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot open report file for writing: " + path);
  }

  if (format == ReportFormat::JsonLines) {
    for (const BenchmarkRow& row : report.rows) {
      out << "{\"classifier\":\"" << row.classifier_name << "\",\"noise_kind\":\""
          << row.noise_kind << "\",\"noise_level\":" << json_number(row.noise_level)
          << ",\"mean_snr_db\":" << json_number(row.mean_snr_db)
          << ",\"mean_accuracy\":" << json_number(row.mean_accuracy)
          << ",\"accuracy_stddev\":" << json_number(row.accuracy_stddev)
          << ",\"trials\":" << row.trials
          << ",\"wall_time_ms\":" << json_number(row.wall_time_ms) << "}\n";
    }
  } else {
    const char sep = format == ReportFormat::Csv ? ',' : '\t';
    out << "classifier" << sep << "noise_kind" << sep << "noise_level" << sep
        << "mean_snr_db" << sep << "mean_accuracy" << sep << "accuracy_stddev" << sep
        << "trials" << sep << "wall_time_ms" << '\n';
    for (const BenchmarkRow& row : report.rows) {
      out << row.classifier_name << sep << row.noise_kind << sep
          << format_report_number(row.noise_level) << sep
          << format_report_number(row.mean_snr_db) << sep
          << format_report_number(row.mean_accuracy) << sep
          << format_report_number(row.accuracy_stddev) << sep << row.trials << sep
          << format_report_number(row.wall_time_ms) << '\n';
    }
  }
  out.flush();
  if (!out) {
    throw IoError("failed writing report file: " + path);
  }
}

void emit_plot_data(const BenchmarkReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot open plot file for writing: " + path);
  }

  // Series keyed by (classifier, noise kind), in order of first appearance.
  std::vector<std::pair<std::string, std::string>> series_keys;
  std::vector<std::vector<const BenchmarkRow*>> series;
  for (const BenchmarkRow& row : report.rows) {
    const std::pair<std::string, std::string> key{row.classifier_name, row.noise_kind};
    auto it = std::find(series_keys.begin(), series_keys.end(), key);
    if (it == series_keys.end()) {
      series_keys.push_back(key);
      series.emplace_back();
      it = std::prev(series_keys.end());
    }
    series[static_cast<std::size_t>(it - series_keys.begin())].push_back(&row);
  }

  out << "# mean accuracy versus noise level; one block per classifier and noise kind\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    std::stable_sort(series[i].begin(), series[i].end(),
                     [](const BenchmarkRow* a, const BenchmarkRow* b) {
                       return a->noise_level < b->noise_level;
                     });
    out << "# classifier: " << series_keys[i].first
        << ", noise: " << series_keys[i].second << '\n';
    for (const BenchmarkRow* row : series[i]) {
      out << format_report_number(row->noise_level) << ' '
          << format_report_number(row->mean_accuracy) << '\n';
    }
    if (i + 1 < series.size()) {
      out << '\n';
    }
  }
  out.flush();
  if (!out) {
    throw IoError("failed writing plot file: " + path);
  }
}

const char* report_format_name(ReportFormat format) {
  switch (format) {
    case ReportFormat::Csv:
      return "csv";
    case ReportFormat::Tsv:
      return "tsv";
    case ReportFormat::JsonLines:
      return "json-lines";
  }
  return "unknown";
}

std::optional<ReportFormat> parse_report_format(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "tsv") return ReportFormat::Tsv;
  if (name == "json-lines" || name == "jsonl") return ReportFormat::JsonLines;
  return std::nullopt;
}

const char* report_format_extension(ReportFormat format) {
  switch (format) {
    case ReportFormat::Csv:
      return "csv";
    case ReportFormat::Tsv:
      return "tsv";
    case ReportFormat::JsonLines:
      return "jsonl";
  }
  return "dat";
}

}  // namespace worm
