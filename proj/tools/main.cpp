#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "histgbt/boosting.hpp"
#include "histgbt/csv.hpp"
#include "histgbt/error.hpp"
#include "histgbt/eval.hpp"
#include "histgbt/model_io.hpp"

namespace {

using namespace histgbt;

std::string fmt_double(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

struct Options {
  std::string data;
  std::string label;
  std::string valid;
  std::string model;
  std::string out;
  std::string objective = "mse";
  std::string binning_mode = "cache";
  std::vector<std::string> merges;
  BoosterConfig config;
  bool mem_report = false;
  std::uint32_t folds = 5;
};

void finalize_config(Options& options) {
  options.config.objective = objective_from_name(options.objective);
  if (options.binning_mode == "cache") {
    options.config.binning_mode = BinningMode::BinCache;
  } else if (options.binning_mode == "zerocopy") {
    options.config.binning_mode = BinningMode::ZeroCopy;
  } else {
    throw Error(ErrorCode::ConfigError,
                "unknown binning mode '" + options.binning_mode +
                    "', expected cache or zerocopy");
  }
}

struct MergeSpec {
  std::string path;
  std::string key;
  std::vector<std::string> columns;
};

MergeSpec parse_merge_spec(const std::string& text) {
  MergeSpec spec;
  const std::size_t first = text.find(':');
  if (first == std::string::npos || first == 0) {
    throw Error(ErrorCode::ConfigError,
                "--merge expects <file>:<key_column>[:<col1,col2,...>], got '" +
                    text + "'");
  }
  spec.path = text.substr(0, first);
  const std::size_t second = text.find(':', first + 1);
  spec.key = text.substr(first + 1, second == std::string::npos
                                        ? std::string::npos
                                        : second - first - 1);
  if (spec.key.empty()) {
    throw Error(ErrorCode::ConfigError,
                "--merge spec '" + text + "' names no key column");
  }
  if (second != std::string::npos) {
    std::string rest = text.substr(second + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
      const std::size_t comma = rest.find(',', start);
      const std::string column =
          rest.substr(start, comma == std::string::npos ? std::string::npos
                                                        : comma - start);
      if (column.empty()) {
        throw Error(ErrorCode::ConfigError,
                    "--merge spec '" + text + "' lists an empty column name");
      }
      spec.columns.push_back(column);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return spec;
}

// Side CSVs stay alive for the whole run; the SideTable views their buffers.
struct LoadedSide {
  CsvTable table;
  std::string key_column;
  std::unique_ptr<SideTable> side;
};

LoadedSide load_side(const MergeSpec& spec, std::uint32_t table_id,
                     std::uint32_t max_bins, MemoryTracker* tracker) {
  LoadedSide loaded;
  loaded.table = read_csv(spec.path);
  loaded.key_column = spec.key;
  if (loaded.table.n_rows == 0) {
    throw Error(ErrorCode::EmptyDataset,
                "side table '" + spec.path + "' has no data rows");
  }
  const std::size_t key_index = loaded.table.column_index(spec.key);
  std::vector<std::pair<std::string, FeatureColumn>> features;
  const auto add_feature = [&](std::size_t j) {
    features.emplace_back(loaded.table.column_names[j],
                          attach_column(loaded.table.columns[j].data(),
                                        loaded.table.n_rows, sizeof(double)));
  };
  if (spec.columns.empty()) {
    for (std::size_t j = 0; j < loaded.table.column_names.size(); ++j) {
      if (j != key_index) add_feature(j);
    }
  } else {
    for (const std::string& name : spec.columns) {
      add_feature(loaded.table.column_index(name));
    }
  }
  loaded.side = std::make_unique<SideTable>(
      register_side_table(table_id, loaded.table.columns[key_index],
                          std::move(features), max_bins, tracker));
  return loaded;
}

std::vector<LoadedSide> load_sides(const std::vector<std::string>& specs,
                                   std::uint32_t max_bins,
                                   MemoryTracker* tracker) {
  std::vector<LoadedSide> sides;
  std::uint32_t table_id = 0;
  for (const std::string& text : specs) {
    sides.push_back(
        load_side(parse_merge_spec(text), table_id++, max_bins, tracker));
  }
  return sides;
}

std::vector<MergeBinding> bindings_of(const std::vector<LoadedSide>& sides) {
  std::vector<MergeBinding> bindings;
  for (const LoadedSide& side : sides) {
    bindings.push_back({side.side.get(), side.key_column});
  }
  return bindings;
}

struct RunData {
  CsvTable table;
  Dataset data;
};

RunData load_labeled(const std::string& path, const std::string& label) {
  RunData run;
  run.table = read_csv(path);
  if (run.table.n_rows == 0) {
    throw Error(ErrorCode::EmptyDataset,
                "'" + path + "' has no data rows");
  }
  run.data = make_dataset(run.table, label);
  return run;
}

[[noreturn]] void rethrow_as_schema_error(const Error& error) {
  std::string detail = error.what();
  const std::string prefix = std::string(error.name()) + ": ";
  if (detail.rfind(prefix, 0) == 0) detail = detail.substr(prefix.size());
  throw Error(ErrorCode::SchemaError, detail);
}

std::vector<double> predict_mapped(const Model& model, const BoundData& bound) {
  try {
    return predict(model, bound);
  } catch (const Error& error) {
    if (error.code() == ErrorCode::SchemaMismatch) {
      rethrow_as_schema_error(error);
    }
    throw;
  }
}

void print_loss_lines(const Model& model) {
  for (std::size_t t = 0; t < model.train_loss.size(); ++t) {
    std::cout << "iter=" << t
              << " train_loss=" << fmt_double(model.train_loss[t]);
    if (t < model.valid_loss.size()) {
      std::cout << " valid_loss=" << fmt_double(model.valid_loss[t]);
    }
    std::cout << '\n';
  }
}

void print_mem_report(const MemoryTracker& tracker) {
  const FootprintReport peak = tracker.peak_footprint();
  std::cout << "mem.raw_value_bytes_copied=" << peak.raw_value_bytes_copied
            << '\n'
            << "mem.bin_cache_bytes=" << peak.bin_cache_bytes << '\n'
            << "mem.histogram_bytes=" << peak.histogram_bytes << '\n'
            << "mem.merge_structure_bytes=" << peak.merge_structure_bytes
            << '\n'
            << "mem.gradient_bytes=" << peak.gradient_bytes << '\n'
            << "mem.total_library_bytes=" << peak.total_library_bytes << '\n';
}

void run_train(Options& options) {
  finalize_config(options);
  MemoryTracker tracker;
  RunData main = load_labeled(options.data, options.label);
  const std::vector<LoadedSide> sides =
      load_sides(options.merges, options.config.max_bins, &tracker);
  const BoundData bound{&main.data, bindings_of(sides)};

  Model model;
  if (options.valid.empty()) {
    model = train(options.config, bound, nullptr, &tracker);
  } else {
    RunData valid = load_labeled(options.valid, options.label);
    const BoundData valid_bound{&valid.data, bindings_of(sides)};
    model = train(options.config, bound, &valid_bound, &tracker);
  }

  print_loss_lines(model);
  save_model(model, options.model);
  if (options.mem_report) print_mem_report(tracker);
}

void run_predict(const Options& options) {
  const Model model = load_model(options.model);
  const CsvTable table = read_csv(options.data);
  std::ofstream out(options.out, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::ConfigError,
                "cannot open '" + options.out + "' for writing");
  }
  const bool probabilities = model.objective == Objective::LogLoss;
  out << (probabilities ? "prediction,probability" : "prediction") << '\n';
  if (table.n_rows == 0) return;

  const Dataset data = make_dataset(table);
  const std::vector<LoadedSide> sides =
      load_sides(options.merges, kDefaultMaxBins, nullptr);
  const BoundData bound{&data, bindings_of(sides)};
  const std::vector<double> scores = predict_mapped(model, bound);
  for (double score : scores) {
    out << fmt_double(score);
    if (probabilities) {
      out << ',' << fmt_double(1.0 / (1.0 + std::exp(-score)));
    }
    out << '\n';
  }
  if (!out.flush()) {
    throw Error(ErrorCode::ConfigError,
                "write to '" + options.out + "' failed");
  }
}

void run_eval(const Options& options) {
  const Model model = load_model(options.model);
  RunData main = load_labeled(options.data, options.label);
  const std::vector<LoadedSide> sides =
      load_sides(options.merges, kDefaultMaxBins, nullptr);
  const BoundData bound{&main.data, bindings_of(sides)};
  const std::vector<double> scores = predict_mapped(model, bound);
  const double* labels = main.data.labels();
  const std::size_t n = main.data.n_rows();
  if (model.objective == Objective::MSE) {
    std::cout << "rmse=" << fmt_double(rmse(labels, scores.data(), n)) << '\n';
  } else {
    std::cout << "auc=" << fmt_double(auc(labels, scores.data(), n)) << '\n'
              << "logloss="
              << fmt_double(objective_loss(Objective::LogLoss, labels,
                                           scores.data(), n))
              << '\n';
  }
}

CsvTable subset_table(const CsvTable& source,
                      const std::vector<std::uint32_t>& rows) {
  CsvTable subset;
  subset.column_names = source.column_names;
  subset.n_rows = rows.size();
  subset.columns.resize(source.columns.size());
  for (std::size_t j = 0; j < source.columns.size(); ++j) {
    subset.columns[j].reserve(rows.size());
    for (std::uint32_t row : rows) {
      subset.columns[j].push_back(source.columns[j][row]);
    }
  }
  return subset;
}

void run_cv(Options& options) {
  finalize_config(options);
  MemoryTracker tracker;
  const CsvTable table = read_csv(options.data);
  if (table.n_rows == 0) {
    throw Error(ErrorCode::EmptyDataset,
                "'" + options.data + "' has no data rows");
  }
  table.column_index(options.label);
  const std::vector<LoadedSide> sides =
      load_sides(options.merges, options.config.max_bins, &tracker);
  const FoldAssignment folds =
      kfold_split(table.n_rows, options.folds, options.config.seed);

  const bool classification = options.config.objective == Objective::LogLoss;
  const char* metric = classification ? "auc" : "rmse";
  double metric_sum = 0.0;
  for (std::uint32_t fold = 0; fold < options.folds; ++fold) {
    std::vector<std::uint32_t> train_rows;
    std::vector<std::uint32_t> test_rows;
    for (std::size_t i = 0; i < table.n_rows; ++i) {
      (folds.fold_of[i] == fold ? test_rows : train_rows)
          .push_back(static_cast<std::uint32_t>(i));
    }
    const CsvTable train_table = subset_table(table, train_rows);
    const CsvTable test_table = subset_table(table, test_rows);
    const Dataset train_data = make_dataset(train_table, options.label);
    const Dataset test_data = make_dataset(test_table, options.label);
    const BoundData train_bound{&train_data, bindings_of(sides)};
    const BoundData test_bound{&test_data, bindings_of(sides)};

    const Model model = train(options.config, train_bound, nullptr, &tracker);
    const std::vector<double> scores = predict_mapped(model, test_bound);
    const double value =
        classification
            ? auc(test_data.labels(), scores.data(), test_data.n_rows())
            : rmse(test_data.labels(), scores.data(), test_data.n_rows());
    metric_sum += value;
    std::cout << "fold=" << fold << ' ' << metric << '=' << fmt_double(value)
              << '\n';
  }
  std::cout << "mean_" << metric << '='
            << fmt_double(metric_sum / static_cast<double>(options.folds))
            << '\n';
}

void add_booster_flags(CLI::App* cmd, Options& options) {
  cmd->add_option("--objective", options.objective, "mse or logloss");
  cmd->add_option("--num-trees", options.config.num_trees,
                  "boosting iterations");
  cmd->add_option("--learning-rate", options.config.learning_rate,
                  "shrinkage in (0, 1]");
  cmd->add_option("--max-leaves", options.config.max_leaves,
                  "leaf budget per tree");
  cmd->add_option("--max-bins", options.config.max_bins,
                  "histogram bin budget per feature");
  cmd->add_option("--min-data-in-leaf", options.config.min_data_in_leaf,
                  "smallest allowed leaf");
  cmd->add_option("--min-split-gain", options.config.min_split_gain,
                  "gain a split must exceed");
  cmd->add_flag("--adaptive-bins", options.config.adaptive_bins,
                "resize hot bins between iterations");
  cmd->add_option("--t-split", options.config.split_hit_threshold,
                  "split hits that trigger a resize");
  cmd->add_option("--binning-mode", options.binning_mode,
                  "cache or zerocopy");
  cmd->add_option("--seed", options.config.seed, "run seed");
  cmd->add_option("--early-stopping-rounds",
                  options.config.early_stopping_rounds,
                  "halt after this many rounds without validation improvement");
  cmd->add_option("--merge", options.merges,
                  "side table join <file>:<key_column>[:<col1,col2,...>]");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"histogram gradient boosted trees"};
  app.require_subcommand(1);

  Options train_options;
  CLI::App* train_cmd =
      app.add_subcommand("train", "fit a model and write it as JSON");
  train_cmd->add_option("--data", train_options.data, "training CSV")
      ->required();
  train_cmd->add_option("--label", train_options.label, "label column")
      ->required();
  train_cmd->add_option("--valid", train_options.valid, "validation CSV");
  train_cmd->add_option("--model", train_options.model, "model output path")
      ->required();
  train_cmd->add_flag("--mem-report", train_options.mem_report,
                      "print peak footprint counters");
  add_booster_flags(train_cmd, train_options);

  Options predict_options;
  CLI::App* predict_cmd =
      app.add_subcommand("predict", "score rows with a saved model");
  predict_cmd->add_option("--data", predict_options.data, "input CSV")
      ->required();
  predict_cmd->add_option("--model", predict_options.model, "model file")
      ->required();
  predict_cmd->add_option("--out", predict_options.out, "predictions CSV")
      ->required();
  predict_cmd->add_option("--merge", predict_options.merges,
                          "side table join <file>:<key_column>[:<cols>]");

  Options eval_options;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "report metrics of a model on labeled data");
  eval_cmd->add_option("--data", eval_options.data, "labeled CSV")->required();
  eval_cmd->add_option("--label", eval_options.label, "label column")
      ->required();
  eval_cmd->add_option("--model", eval_options.model, "model file")
      ->required();
  eval_cmd->add_option("--merge", eval_options.merges,
                       "side table join <file>:<key_column>[:<cols>]");

  Options cv_options;
  CLI::App* cv_cmd =
      app.add_subcommand("cv", "k-fold cross-validation with per-fold metrics");
  cv_cmd->add_option("--data", cv_options.data, "labeled CSV")->required();
  cv_cmd->add_option("--label", cv_options.label, "label column")->required();
  cv_cmd->add_option("--folds", cv_options.folds, "fold count")->required();
  add_booster_flags(cv_cmd, cv_options);

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) {
      run_train(train_options);
    } else if (predict_cmd->parsed()) {
      run_predict(predict_options);
    } else if (eval_cmd->parsed()) {
      run_eval(eval_options);
    } else if (cv_cmd->parsed()) {
      run_cv(cv_options);
    }
    return 0;
  } catch (const Error& error) {
    std::cerr << error.what() << '\n';
    return 1;
  } catch (const std::exception& error) {
    std::cerr << error.what() << '\n';
    return 1;
  }
}
