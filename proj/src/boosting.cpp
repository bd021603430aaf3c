#include "histgbt/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "histgbt/error.hpp"
#include "histgbt/kernels.hpp"

namespace histgbt {

namespace {

constexpr double kRateClamp = 1e-6;

// Mean negative log-likelihood term for one row, stable for any finite
// score: softplus(s) - y*s with softplus(s) = max(s, 0) + log1p(exp(-|s|)).
double logloss_term(double label, double score) {
  const double softplus =
      std::max(score, 0.0) + std::log1p(std::exp(-std::fabs(score)));
  return softplus - label * score;
}

void require_binary_labels(const double* labels, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0) {
      throw Error(ErrorCode::InvalidLabel,
                  "logloss label at row " + std::to_string(i) + " is " +
                      std::to_string(labels[i]) + ", expected 0 or 1");
    }
  }
}

// Books a fixed byte count against the tracker for the lifetime of the
// owning scope.
class ScopedBooking {
 public:
  ScopedBooking(MemoryTracker* tracker, MemCategory category,
                std::size_t bytes)
      : tracker_(tracker), category_(category), bytes_(bytes) {
    if (tracker_ != nullptr) tracker_->add(category_, bytes_);
  }
  ~ScopedBooking() {
    if (tracker_ != nullptr) tracker_->release(category_, bytes_);
  }
  ScopedBooking(const ScopedBooking&) = delete;
  ScopedBooking& operator=(const ScopedBooking&) = delete;

 private:
  MemoryTracker* tracker_;
  MemCategory category_;
  std::size_t bytes_;
};

// Owning storage behind the TrainFeature views handed to the tree grower.
// Base features get fresh mappers and binned columns when with_bins is set;
// merged features always reuse the side table's key-granularity state.
struct Assembly {
  std::vector<std::unique_ptr<BinMapper>> mappers;
  std::vector<std::unique_ptr<BinnedColumn>> binned;
  std::vector<std::unique_ptr<JoinIndex>> joins;
  std::vector<TrainFeature> features;
  std::vector<std::string> names;
};

Assembly assemble(const BoundData& bound, std::uint32_t max_bins,
                  BinningMode mode, bool with_bins, MemoryTracker* tracker) {
  if (bound.data == nullptr) {
    throw Error(ErrorCode::EmptyDataset, "no dataset bound");
  }
  const Dataset& data = *bound.data;
  Assembly out;
  for (std::size_t j = 0; j < data.n_features(); ++j) {
    const FeatureColumn& column = data.column(j);
    TrainFeature feature;
    feature.column = &column;
    if (with_bins) {
      out.mappers.push_back(
          std::make_unique<BinMapper>(construct_bins(column, max_bins)));
      out.binned.push_back(std::make_unique<BinnedColumn>(
          column, *out.mappers.back(), mode, tracker));
      feature.mapper = out.mappers.back().get();
      feature.binned = out.binned.back().get();
    }
    out.features.push_back(feature);
    out.names.push_back(data.feature_name(j));
  }
  for (const MergeBinding& binding : bound.merges) {
    if (binding.side == nullptr) {
      throw Error(ErrorCode::ConfigError, "merge binding has no side table");
    }
    const FeatureColumn& key_column =
        data.column(data.feature_index(binding.key_column));
    out.joins.push_back(std::make_unique<JoinIndex>(
        build_join_index(key_column, *binding.side, tracker)));
    const JoinIndex* join = out.joins.back().get();
    for (std::size_t j = 0; j < binding.side->n_features(); ++j) {
      auto& side_feature = binding.side->feature(j);
      TrainFeature feature;
      feature.mapper = side_feature.mapper.get();
      feature.column = &side_feature.column;
      feature.binned = side_feature.binned.get();
      feature.join = join;
      out.features.push_back(feature);
      out.names.push_back(side_feature.name);
    }
  }
  std::unordered_set<std::string> seen;
  for (const std::string& name : out.names) {
    if (!seen.insert(name).second) {
      throw Error(ErrorCode::SchemaError,
                  "feature name '" + name + "' appears twice in the schema");
    }
  }
  return out;
}

// Divides or shrinks every finite bin whose hit counter exceeded the
// threshold, then requantizes the feature if its boundaries moved. Bins are
// visited in descending order so a divide's index shift never lands on a
// bin still awaiting its check.
void apply_adaptive_resizes(const std::vector<TrainFeature>& features,
                            std::uint32_t threshold) {
  for (const TrainFeature& feature : features) {
    BinMapper* mapper = feature.mapper;
    for (std::uint32_t bin = mapper->n_finite_bins(); bin-- > 0;) {
      if (mapper->split_hits(bin) > threshold) {
        mapper->adaptive_resize(bin, *feature.column);
      }
    }
    if (feature.binned->is_stale()) feature.binned->requantize();
  }
}

void accumulate_scores(const Tree& tree, const std::int32_t* leaf_of_row,
                       double learning_rate, double* scores, std::size_t n) {
  const auto& nodes = tree.nodes();
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] += learning_rate * nodes[leaf_of_row[i]].value;
  }
}

}  // namespace

const char* objective_name(Objective objective) {
  return objective == Objective::MSE ? "mse" : "logloss";
}

Objective objective_from_name(const std::string& name) {
  if (name == "mse") return Objective::MSE;
  if (name == "logloss") return Objective::LogLoss;
  throw Error(ErrorCode::ConfigError,
              "unknown objective '" + name + "', expected mse or logloss");
}

double initial_score(Objective objective, const double* labels,
                     std::size_t n) {
  if (n == 0) {
    throw Error(ErrorCode::EmptyDataset,
                "initial score needs at least one label");
  }
  const double mean = kernels::sum(labels, n) / static_cast<double>(n);
  if (objective == Objective::MSE) return mean;
  // Computing 1 - rate after clamping at the top cancels most of the
  // complement's precision, so each clamp edge pairs rate with its exact
  // complement.
  double rate = mean;
  double complement = 1.0 - mean;
  if (mean > 1.0 - kRateClamp) {
    rate = 1.0 - kRateClamp;
    complement = kRateClamp;
  } else if (mean < kRateClamp) {
    rate = kRateClamp;
    complement = 1.0 - kRateClamp;
  }
  return std::log(rate / complement);
}

void compute_gradients(Objective objective, const double* labels,
                       const double* scores, std::size_t n, double* g,
                       double* h) {
  if (objective == Objective::MSE) {
    kernels::mse_gradients(scores, labels, g, h, n);
    return;
  }
  require_binary_labels(labels, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = 1.0 / (1.0 + std::exp(-scores[i]));
    g[i] = p - labels[i];
    h[i] = p * (1.0 - p);
  }
}

std::vector<GradientPair> compute_gradients(Objective objective,
                                            const std::vector<double>& labels,
                                            const std::vector<double>& scores) {
  if (labels.size() != scores.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                "labels and scores differ in length");
  }
  std::vector<double> g(labels.size());
  std::vector<double> h(labels.size());
  compute_gradients(objective, labels.data(), scores.data(), labels.size(),
                    g.data(), h.data());
  std::vector<GradientPair> pairs(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) pairs[i] = {g[i], h[i]};
  return pairs;
}

double objective_loss(Objective objective, const double* labels,
                      const double* scores, std::size_t n) {
  if (n == 0) {
    throw Error(ErrorCode::EmptyDataset, "loss needs at least one row");
  }
  if (objective == Objective::MSE) {
    return std::sqrt(kernels::squared_error_sum(scores, labels, n) /
                     static_cast<double>(n));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += logloss_term(labels[i], scores[i]);
  }
  return total / static_cast<double>(n);
}

void validate(const BoosterConfig& config) {
  if (config.num_trees < 1) {
    throw Error(ErrorCode::ConfigError, "num_trees must be at least 1");
  }
  if (!(config.learning_rate > 0.0) || config.learning_rate > 1.0) {
    throw Error(ErrorCode::ConfigError, "learning_rate must be in (0, 1]");
  }
  if (config.max_leaves < 1) {
    throw Error(ErrorCode::ConfigError, "max_leaves must be at least 1");
  }
  if (config.max_bins < 2 || config.max_bins > kDefaultMaxBins) {
    throw Error(ErrorCode::ConfigError, "max_bins must be in [2, 256]");
  }
  if (config.min_data_in_leaf < 1) {
    throw Error(ErrorCode::ConfigError, "min_data_in_leaf must be at least 1");
  }
  if (config.min_split_gain < 0.0) {
    throw Error(ErrorCode::ConfigError, "min_split_gain must be nonnegative");
  }
  if (config.split_hit_threshold < 1) {
    throw Error(ErrorCode::ConfigError,
                "split_hit_threshold must be at least 1");
  }
}

Model train_on_features(const BoosterConfig& config,
                        const TrainingInputs& inputs,
                        const ValidationInputs* valid,
                        MemoryTracker* tracker) {
  validate(config);
  const std::size_t n = inputs.n_rows;
  if (n == 0) {
    throw Error(ErrorCode::EmptyDataset, "training set has no rows");
  }
  if (inputs.labels == nullptr) {
    throw Error(ErrorCode::SchemaError, "training set has no labels");
  }
  if (inputs.features.size() != inputs.feature_names.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                "feature views and names differ in length");
  }
  for (const TrainFeature& feature : inputs.features) {
    if (feature.mapper == nullptr || feature.column == nullptr ||
        feature.binned == nullptr) {
      throw Error(ErrorCode::ConfigError,
                  "training features need a mapper, column and binned view");
    }
  }
  if (valid != nullptr) {
    if (valid->n_rows == 0) {
      throw Error(ErrorCode::EmptyDataset, "validation set has no rows");
    }
    if (valid->labels == nullptr) {
      throw Error(ErrorCode::SchemaError, "validation set has no labels");
    }
    if (valid->features.size() != inputs.features.size()) {
      throw Error(ErrorCode::SchemaMismatch,
                  "validation feature count differs from training");
    }
  }
  if (config.objective == Objective::LogLoss) {
    require_binary_labels(inputs.labels, n);
    if (valid != nullptr) require_binary_labels(valid->labels, valid->n_rows);
  }

  Model model;
  model.objective = config.objective;
  model.learning_rate = config.learning_rate;
  model.seed = config.seed;
  model.configured_num_trees = config.num_trees;
  model.feature_names = inputs.feature_names;
  model.base_score = initial_score(config.objective, inputs.labels, n);

  std::vector<double> scores(n, model.base_score);
  std::vector<double> valid_scores;
  if (valid != nullptr) valid_scores.assign(valid->n_rows, model.base_score);

  std::vector<double> g(n);
  std::vector<double> h(n);
  ScopedBooking gradient_bytes(tracker, MemCategory::Gradient,
                               2 * n * sizeof(double));

  const TreeConfig tree_config{config.max_leaves, config.min_data_in_leaf,
                               config.min_split_gain};
  double best_valid = std::numeric_limits<double>::infinity();
  std::uint32_t rounds_without_improvement = 0;

  for (std::uint32_t t = 0; t < config.num_trees; ++t) {
    compute_gradients(config.objective, inputs.labels, scores.data(), n,
                      g.data(), h.data());
    GrowResult grown =
        grow_tree(inputs.features, g.data(), h.data(), n, tree_config, tracker);
    accumulate_scores(grown.tree, grown.leaf_of_row.data(),
                      config.learning_rate, scores.data(), n);
    model.trees.push_back(std::move(grown.tree));

    const double train_loss =
        objective_loss(config.objective, inputs.labels, scores.data(), n);
    if (!std::isfinite(train_loss)) {
      throw Error(ErrorCode::DivergenceDetected,
                  "training loss is not finite at iteration " +
                      std::to_string(t));
    }
    model.train_loss.push_back(train_loss);

    if (valid != nullptr) {
      const Tree& tree = model.trees.back();
      for (std::size_t i = 0; i < valid->n_rows; ++i) {
        const double value = predict_tree(tree, [&](std::uint32_t fid) {
          return valid->features[fid].value_of_row(i);
        });
        valid_scores[i] += config.learning_rate * value;
      }
      const double valid_loss = objective_loss(
          config.objective, valid->labels, valid_scores.data(), valid->n_rows);
      if (!std::isfinite(valid_loss)) {
        throw Error(ErrorCode::DivergenceDetected,
                    "validation loss is not finite at iteration " +
                        std::to_string(t));
      }
      model.valid_loss.push_back(valid_loss);
      if (valid_loss < best_valid) {
        best_valid = valid_loss;
        rounds_without_improvement = 0;
      } else {
        ++rounds_without_improvement;
      }
      if (config.early_stopping_rounds > 0 &&
          rounds_without_improvement >= config.early_stopping_rounds) {
        break;
      }
    }

    if (config.adaptive_bins && t + 1 < config.num_trees) {
      apply_adaptive_resizes(inputs.features, config.split_hit_threshold);
    }
  }

  for (const TrainFeature& feature : inputs.features) {
    model.bin_counts.push_back(feature.mapper->n_bins());
    model.boundary_snapshot.push_back(feature.mapper->boundaries());
  }
  return model;
}

Model train(const BoosterConfig& config, const BoundData& train_data,
            const BoundData* valid_data, MemoryTracker* tracker) {
  validate(config);
  if (train_data.data == nullptr || train_data.data->n_rows() == 0) {
    throw Error(ErrorCode::EmptyDataset, "training set has no rows");
  }
  if (!train_data.data->has_labels()) {
    throw Error(ErrorCode::SchemaError, "training set has no labels");
  }
  Assembly assembly = assemble(train_data, config.max_bins,
                               config.binning_mode, true, tracker);
  TrainingInputs inputs;
  inputs.features = assembly.features;
  inputs.feature_names = assembly.names;
  inputs.labels = train_data.data->labels();
  inputs.n_rows = train_data.data->n_rows();

  if (valid_data == nullptr) {
    return train_on_features(config, inputs, nullptr, tracker);
  }
  if (valid_data->data == nullptr || valid_data->data->n_rows() == 0) {
    throw Error(ErrorCode::EmptyDataset, "validation set has no rows");
  }
  if (!valid_data->data->has_labels()) {
    throw Error(ErrorCode::SchemaError, "validation set has no labels");
  }
  Assembly valid_assembly = assemble(*valid_data, config.max_bins,
                                     config.binning_mode, false, tracker);
  if (valid_assembly.names != assembly.names) {
    throw Error(ErrorCode::SchemaMismatch,
                "validation schema does not match training schema");
  }
  ValidationInputs valid;
  valid.features = valid_assembly.features;
  valid.labels = valid_data->data->labels();
  valid.n_rows = valid_data->data->n_rows();
  return train_on_features(config, inputs, &valid, tracker);
}

std::vector<double> predict(const Model& model, const BoundData& data) {
  if (data.data == nullptr) {
    throw Error(ErrorCode::EmptyDataset, "no dataset bound");
  }
  Assembly assembly =
      assemble(data, kDefaultMaxBins, BinningMode::ZeroCopy, false, nullptr);
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t j = 0; j < assembly.names.size(); ++j) {
    position.emplace(assembly.names[j], j);
  }
  std::vector<const TrainFeature*> ordered;
  ordered.reserve(model.feature_names.size());
  for (const std::string& name : model.feature_names) {
    const auto it = position.find(name);
    if (it == position.end()) {
      throw Error(ErrorCode::SchemaMismatch,
                  "feature '" + name + "' is missing from the data");
    }
    ordered.push_back(&assembly.features[it->second]);
  }
  const std::size_t n = data.data->n_rows();
  std::vector<double> out(n, model.base_score);
  for (std::size_t i = 0; i < n; ++i) {
    double score = model.base_score;
    for (const Tree& tree : model.trees) {
      const double value = predict_tree(tree, [&](std::uint32_t fid) {
        return ordered[fid]->value_of_row(i);
      });
      score += model.learning_rate * value;
    }
    out[i] = score;
  }
  return out;
}

std::vector<double> predict_probability(const Model& model,
                                        const BoundData& data) {
  if (model.objective != Objective::LogLoss) {
    throw Error(ErrorCode::ConfigError,
                "probability view requires a logloss model");
  }
  std::vector<double> scores = predict(model, data);
  for (double& s : scores) s = 1.0 / (1.0 + std::exp(-s));
  return scores;
}

}  // namespace histgbt
