#include "worm/bench.hpp"
#include "worm/model.hpp"
#include "worm/synthetic.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

namespace fs = std::filesystem;

struct BenchRunArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
  int threads = 1;
  bool timings = false;
};

struct BenchGenArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

struct FitArgs {
  std::string train_csv;
  std::string model_path;
  double tau = 0.95;
  std::string variant = "weighted_abs";
  bool center = false;
};

struct PredictArgs {
  std::string model_path;
  std::string data_csv;
  std::optional<std::string> out_csv;
};

worm::ExperimentConfig load_config(const std::string& path,
                                   const std::optional<std::uint64_t>& seed,
                                   const std::optional<std::string>& out_dir,
                                   const std::optional<std::string>& format) {
  worm::ExperimentConfig config = worm::load_experiment_config(path);
  if (seed) {
    config.master_seed = *seed;
  }
  if (out_dir) {
    config.output_dir = *out_dir;
  }
  if (format) {
    if (!worm::parse_report_format(*format)) {
      throw worm::ConfigError("unknown report format '" + *format + "'");
    }
    config.format = *format;
  }
  return config;
}

int run_bench_run(const BenchRunArgs& args) {
  worm::ExperimentConfig config =
      load_config(args.config_path, args.seed, args.out_dir, args.format);
  config.threads = args.threads;
  config.emit_timings = args.timings;

  const worm::BenchmarkReport report = worm::run_experiment(config);

  fs::create_directories(config.output_dir);
  const worm::ReportFormat format = *worm::parse_report_format(config.format);
  const fs::path report_path =
      fs::path(config.output_dir) /
      (std::string("report.") + worm::report_format_extension(format));
  const fs::path plot_path = fs::path(config.output_dir) / "plot.dat";

  worm::emit_report(report, format, report_path.string());
  worm::emit_plot_data(report, plot_path.string());

  std::cout << "wrote " << report_path.string() << "\n";
  std::cout << "wrote " << plot_path.string() << "\n";
  return 0;
}

int run_bench_gen(const BenchGenArgs& args) {
  const worm::ExperimentConfig config =
      load_config(args.config_path, args.seed, args.out_dir, std::nullopt);

  fs::create_directories(config.output_dir);
  const std::uint64_t trial_seed = worm::derive_seed(config.master_seed, 0);
  for (std::size_t s = 0; s < config.noise_sweep.size(); ++s) {
    worm::GeneratorConfig gen = config.generator;
    gen.noise = config.noise_sweep[s];
    gen.seed = trial_seed;
    const worm::GeneratedData data = worm::generate(gen);

    const std::string stem =
        std::string(worm::noise_kind_name(gen.noise.kind)) + "_" + std::to_string(s);
    const fs::path train_path = fs::path(config.output_dir) / ("train_" + stem + ".csv");
    const fs::path test_path = fs::path(config.output_dir) / ("test_" + stem + ".csv");
    worm::write_dataset_csv(data.train, train_path.string());
    worm::write_dataset_csv(data.test, test_path.string());
    std::cout << "wrote " << train_path.string() << "\n";
    std::cout << "wrote " << test_path.string() << "\n";
  }
  return 0;
}

int run_fit(const FitArgs& args) {
  const auto variant = worm::parse_decision_variant(args.variant);
  if (!variant) {
    throw worm::ConfigError("unknown decision variant '" + args.variant + "'");
  }
  if (!(args.tau > 0.0) || !(args.tau <= 1.0)) {
    throw worm::ConfigError("tau must lie in (0, 1]");
  }

  const worm::LabeledDataset train = worm::read_dataset_csv(args.train_csv);
  worm::WormOptions options;
  options.energy_threshold = args.tau;
  options.variant = *variant;
  options.center_classes = args.center;

  const worm::WormModel model = worm::fit_worm(train, options);
  worm::save_model(model, args.model_path);

  std::cout << "fitted " << model.num_classes() << " classes, "
            << model.total_components() << " components (dim " << model.rows()
            << "), tau " << args.tau << "\n";
  std::cout << "wrote " << args.model_path << "\n";
  return 0;
}

int run_predict(const PredictArgs& args) {
  const worm::WormModel model = worm::load_model(args.model_path);
  const worm::LabeledDataset data = worm::read_dataset_csv(args.data_csv);
  if (data.dim() != model.rows()) {
    throw worm::ContractError("dataset dimension " + std::to_string(data.dim()) +
                              " does not match model dimension " +
                              std::to_string(model.rows()));
  }

  const std::vector<int> predicted = worm::classify_worm_batch(model, data.data);

  if (args.out_csv) {
    std::ofstream out(*args.out_csv, std::ios::trunc);
    if (!out) {
      throw worm::IoError("cannot open predictions file for writing: " + *args.out_csv);
    }
    out << "index,predicted_label,true_label\n";
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      out << i << ',' << predicted[i] << ',' << data.labels[i] << '\n';
    }
    if (!out) {
      throw worm::IoError("failed writing predictions file: " + *args.out_csv);
    }
    std::cout << "wrote " << *args.out_csv << "\n";
  }

  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == data.labels[i]) {
      ++correct;
    }
  }
  std::cout << "accuracy " << static_cast<double>(correct) / static_cast<double>(predicted.size())
            << " (" << correct << "/" << predicted.size() << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regression-based subspace classification benchmark"};
  app.require_subcommand(1);

  BenchRunArgs run_args;
  BenchGenArgs gen_args;
  FitArgs fit_args;
  PredictArgs predict_args;

  CLI::App* bench = app.add_subcommand("bench", "Benchmark harness");
  bench->require_subcommand(1);

  CLI::App* bench_run = bench->add_subcommand("run", "Run the full experiment from a config file");
  bench_run->add_option("config", run_args.config_path, "Experiment config file")->required();
  bench_run->add_option("--seed", run_args.seed, "Override master_seed");
  bench_run->add_option("--out", run_args.out_dir, "Override output directory");
  bench_run->add_option("--format", run_args.format, "Report format: csv, tsv, json-lines");
  bench_run->add_option("--threads", run_args.threads, "Worker threads for parallel trials");
  bench_run->add_flag("--timings", run_args.timings,
                      "Write measured wall times into the report (non-reproducible bytes)");

  CLI::App* bench_gen = bench->add_subcommand("gen", "Generate the sweep datasets only");
  bench_gen->add_option("config", gen_args.config_path, "Experiment config file")->required();
  bench_gen->add_option("--seed", gen_args.seed, "Override master_seed");
  bench_gen->add_option("--out", gen_args.out_dir, "Override output directory");

  CLI::App* fit = app.add_subcommand("fit", "Fit a classifier from a dataset CSV");
  fit->add_option("train", fit_args.train_csv, "Training dataset CSV")->required();
  fit->add_option("--model", fit_args.model_path, "Output model file")->required();
  fit->add_option("--tau", fit_args.tau, "Energy threshold in (0, 1]");
  fit->add_option("--variant", fit_args.variant, "Decision variant: weighted_abs or weighted_signed");
  fit->add_flag("--center", fit_args.center, "Center each class before the SVD");

  CLI::App* predict = app.add_subcommand("predict", "Classify a dataset CSV with a fitted model");
  predict->add_option("model", predict_args.model_path, "Model file")->required();
  predict->add_option("data", predict_args.data_csv, "Dataset CSV to classify")->required();
  predict->add_option("--out", predict_args.out_csv, "Per-sample predictions CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 1;
  }

  try {
    if (bench_run->parsed()) {
      return run_bench_run(run_args);
    }
    if (bench_gen->parsed()) {
      return run_bench_gen(gen_args);
    }
    if (fit->parsed()) {
      return run_fit(fit_args);
    }
    if (predict->parsed()) {
      return run_predict(predict_args);
    }
    std::cerr << "error: no subcommand selected\n";
    return 1;
  } catch (const worm::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
}
