#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "histgbt/binning.hpp"
#include "histgbt/columnar.hpp"
#include "histgbt/histogram.hpp"

// Implicit relational merge: side tables keep one value per unique key, a
// 4-byte ordinal per main row joins them, and histograms accumulate through
// the ordinals so no N-length merged column ever exists.

namespace histgbt {

inline constexpr std::uint32_t kMissingOrdinal = 0xFFFFFFFFu;

// Per main-table row, the position of its key in a SideTable, or
// kMissingOrdinal for keys absent from the side. Books 4 bytes per row as
// merge_structure_bytes.
class JoinIndex {
 public:
  JoinIndex(std::vector<std::uint32_t> ordinals, MemoryTracker* tracker);
  ~JoinIndex();

  JoinIndex(JoinIndex&& other) noexcept;
  JoinIndex& operator=(JoinIndex&& other) noexcept;
  JoinIndex(const JoinIndex&) = delete;
  JoinIndex& operator=(const JoinIndex&) = delete;

  std::uint32_t ordinal(std::size_t row) const { return ordinals_[row]; }
  std::size_t n_rows() const { return ordinals_.size(); }

 private:
  void release_tracking();

  std::vector<std::uint32_t> ordinals_;
  MemoryTracker* tracker_ = nullptr;
};

// One relational side table: U unique keys and feature columns of length U,
// each binned at key granularity. Mappers always carry a missing bin so
// unmatched join keys have somewhere to go.
class SideTable {
 public:
  struct SideFeature {
    std::string name;
    FeatureColumn column;
    std::unique_ptr<BinMapper> mapper;
    std::unique_ptr<BinnedColumn> binned;
  };

  std::size_t n_keys() const { return keys_.size(); }
  std::size_t n_features() const { return features_.size(); }
  SideFeature& feature(std::size_t j) { return features_[j]; }
  const SideFeature& feature(std::size_t j) const { return features_[j]; }
  const std::vector<double>& keys() const { return keys_; }

  // Position of `key` in the key list, or kMissingOrdinal.
  std::uint32_t lookup(double key) const;

  std::uint32_t table_id() const { return table_id_; }

 private:
  friend SideTable register_side_table(
      std::uint32_t table_id, std::vector<double> keys,
      std::vector<std::pair<std::string, FeatureColumn>> features,
      std::uint32_t max_bins, MemoryTracker* tracker);

  std::uint32_t table_id_ = 0;
  std::vector<double> keys_;
  std::unordered_map<double, std::uint32_t> key_to_ordinal_;
  std::vector<SideFeature> features_;
};

SideTable register_side_table(
    std::uint32_t table_id, std::vector<double> keys,
    std::vector<std::pair<std::string, FeatureColumn>> features,
    std::uint32_t max_bins, MemoryTracker* tracker = nullptr);

JoinIndex build_join_index(const FeatureColumn& main_key_column,
                           const SideTable& side,
                           MemoryTracker* tracker = nullptr);

// Virtual N-length column: side value at the row's join ordinal, NaN where
// the ordinal is missing.
struct MergedFeature {
  const SideTable* side = nullptr;
  std::size_t side_feature = 0;
  const JoinIndex* join = nullptr;

  double virtual_value(std::size_t row) const;
  std::size_t n_rows() const { return join->n_rows(); }
};

// Histogram over node rows of a merged feature, accumulated through the
// join ordinals against the side table's key-granularity bins.
Histogram implicit_histogram(const std::uint32_t* rows, std::size_t n_rows,
                             const MergedFeature& merged, const double* g,
                             const double* h,
                             MemoryTracker* tracker = nullptr);

// Fully expanded N-length copies of every side feature, booked as
// raw_value_bytes_copied. Equivalence oracle and memory baseline only; the
// training path never calls this.
class MaterializedMerge {
 public:
  MaterializedMerge(std::vector<std::string> names,
                    std::vector<std::vector<double>> columns,
                    MemoryTracker* tracker);
  ~MaterializedMerge();

  MaterializedMerge(MaterializedMerge&& other) noexcept;
  MaterializedMerge& operator=(MaterializedMerge&&) = delete;
  MaterializedMerge(const MaterializedMerge&) = delete;
  MaterializedMerge& operator=(const MaterializedMerge&) = delete;

  std::size_t n_columns() const { return columns_.size(); }
  const std::string& name(std::size_t j) const { return names_[j]; }
  const std::vector<double>& column(std::size_t j) const { return columns_[j]; }

 private:
  void release_tracking();

  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
  MemoryTracker* tracker_ = nullptr;
};

MaterializedMerge materialize_merge(const FeatureColumn& main_key_column,
                                    const SideTable& side,
                                    MemoryTracker* tracker = nullptr);

}  // namespace histgbt
