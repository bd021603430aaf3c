#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "histgbt/binning.hpp"
#include "histgbt/columnar.hpp"
#include "histgbt/histogram.hpp"
#include "histgbt/merge.hpp"
#include "histgbt/tree.hpp"

// Stagewise boosting driver: second-order gradients per objective, leaf-wise
// tree growth, shrinkage at accumulation time (trees store raw Newton
// weights), optional validation-based early stopping, and the between-
// iteration bin resize pass.

namespace histgbt {

enum class Objective { MSE, LogLoss };

const char* objective_name(Objective objective);
// Accepts "mse" or "logloss".
Objective objective_from_name(const std::string& name);

// MSE: the label mean. LogLoss: log-odds of the positive rate, with the rate
// clamped to [1e-6, 1 - 1e-6] so one-class labels stay finite.
double initial_score(Objective objective, const double* labels, std::size_t n);

// First and second loss derivatives at the current scores. MSE: g = s - y,
// h = 1. LogLoss: p = 1/(1 + exp(-s)), g = p - y, h = p(1 - p); labels
// outside {0, 1} raise InvalidLabel.
void compute_gradients(Objective objective, const double* labels,
                       const double* scores, std::size_t n, double* g,
                       double* h);

std::vector<GradientPair> compute_gradients(Objective objective,
                                            const std::vector<double>& labels,
                                            const std::vector<double>& scores);

// Reported training/validation loss: RMSE for MSE, mean negative
// log-likelihood for LogLoss (computed through softplus, stable for any
// finite score).
double objective_loss(Objective objective, const double* labels,
                      const double* scores, std::size_t n);

struct BoosterConfig {
  Objective objective = Objective::MSE;
  std::uint32_t num_trees = 100;
  double learning_rate = 0.1;
  std::uint32_t max_leaves = 31;
  std::uint32_t max_bins = kDefaultMaxBins;
  std::size_t min_data_in_leaf = 20;
  double min_split_gain = 0.0;
  // A bin whose accumulated split hits exceed this threshold is resized
  // between iterations when adaptive_bins is on.
  std::uint32_t split_hit_threshold = kDefaultSplitHitThreshold;
  bool adaptive_bins = false;
  BinningMode binning_mode = BinningMode::BinCache;
  std::uint64_t seed = 0;
  // 0 disables early stopping; otherwise training halts after this many
  // consecutive iterations without a new best validation loss.
  std::uint32_t early_stopping_rounds = 0;
};

// Raises ConfigError on out-of-range fields.
void validate(const BoosterConfig& config);

struct Model {
  Objective objective = Objective::MSE;
  double base_score = 0.0;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
  std::uint32_t configured_num_trees = 0;
  std::vector<std::string> feature_names;
  // Trees hold raw Newton weights; scores are base_score plus the
  // learning-rate-scaled sum over trees.
  std::vector<Tree> trees;
  // Per-feature bin state at the end of training.
  std::vector<std::uint32_t> bin_counts;
  std::vector<std::vector<double>> boundary_snapshot;
  // One entry per trained tree.
  std::vector<double> train_loss;
  std::vector<double> valid_loss;
};

// Joins one registered side table through the named key column of the main
// dataset. The side table outlives training; its mappers and key-granularity
// bin caches are shared, never copied.
struct MergeBinding {
  SideTable* side = nullptr;
  std::string key_column;
};

struct BoundData {
  const Dataset* data = nullptr;
  std::vector<MergeBinding> merges;
};

// Caller-assembled training views: one TrainFeature per model feature, the
// label array, and the row count. Features referencing the same mapper from
// different views stay consistent because resizes reset hit counters.
struct TrainingInputs {
  std::vector<TrainFeature> features;
  std::vector<std::string> feature_names;
  const double* labels = nullptr;
  std::size_t n_rows = 0;
};

// Validation rows need only raw value access (prediction walks thresholds),
// so base-feature entries may leave mapper and binned null.
struct ValidationInputs {
  std::vector<TrainFeature> features;
  const double* labels = nullptr;
  std::size_t n_rows = 0;
};

Model train_on_features(const BoosterConfig& config,
                        const TrainingInputs& inputs,
                        const ValidationInputs* valid = nullptr,
                        MemoryTracker* tracker = nullptr);

// Bins every dataset column, builds one join index per merge binding, and
// trains over the combined feature list (dataset columns first, then side
// features in binding order). Duplicate names across the combined schema
// raise SchemaError.
Model train(const BoosterConfig& config, const BoundData& train_data,
            const BoundData* valid_data = nullptr,
            MemoryTracker* tracker = nullptr);

// Raw scores: base_score + learning_rate * sum of tree outputs. Features are
// resolved by name against the dataset and merge bindings; a name the data
// cannot supply raises SchemaMismatch.
std::vector<double> predict(const Model& model, const BoundData& data);

// Logistic map of the raw scores. Only LogLoss models have a probability
// view; MSE models raise ConfigError.
std::vector<double> predict_probability(const Model& model,
                                        const BoundData& data);

}  // namespace histgbt
