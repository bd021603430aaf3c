#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "histgbt/histogram.hpp"
#include "histgbt/merge.hpp"

// Best-split search over per-feature histograms and leaf-wise tree growth
// with Newton leaf weights. Missing values always route left, both when
// partitioning rows and when descending at prediction time.

namespace histgbt {

struct SplitInfo {
  std::uint32_t feature_id = 0;
  std::uint32_t split_bin = 0;
  double threshold = 0.0;
  double gain = 0.0;
  NodeStats left_stats;
  NodeStats right_stats;
  bool missing_goes_left = true;
};

struct TreeConfig {
  std::uint32_t max_leaves = 31;
  std::size_t min_data_in_leaf = 20;
  double min_split_gain = 0.0;
};

struct TreeNode {
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint32_t feature_id = 0;
  double threshold = 0.0;
  double value = 0.0;

  bool is_leaf() const { return left < 0; }
};

class Tree {
 public:
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::vector<TreeNode>& nodes() { return nodes_; }
  std::size_t n_nodes() const { return nodes_.size(); }
  std::size_t n_leaves() const;

 private:
  std::vector<TreeNode> nodes_;
};

// Walks the tree with a callable `value_of(feature_id) -> double`; values
// compare as value ≤ threshold → left, non-finite → left.
template <typename Accessor>
double predict_tree(const Tree& tree, Accessor&& value_of) {
  std::int32_t node = 0;
  while (!tree.nodes()[node].is_leaf()) {
    const TreeNode& n = tree.nodes()[node];
    const double v = value_of(n.feature_id);
    node = (!std::isfinite(v) || v <= n.threshold) ? n.left : n.right;
  }
  return tree.nodes()[node].value;
}

// Row-index permutation with one contiguous range per tree node; children
// ranges partition the parent's exactly.
class RowPartition {
 public:
  explicit RowPartition(std::size_t n_rows);

  const std::uint32_t* node_rows(std::size_t node) const {
    return rows_.data() + ranges_[node].begin;
  }
  std::size_t node_count(std::size_t node) const {
    return ranges_[node].end - ranges_[node].begin;
  }
  std::size_t n_nodes() const { return ranges_.size(); }

  // Splits `node`'s range in place; rows satisfying goes_left keep their
  // relative order on the left, the rest on the right. Ranges for left_id
  // and right_id are appended (ids must equal n_nodes() and n_nodes()+1).
  template <typename Predicate>
  void split(std::size_t node, Predicate&& goes_left) {
    const Range r = ranges_[node];
    auto* first = rows_.data() + r.begin;
    auto* last = rows_.data() + r.end;
    auto* mid = std::stable_partition(first, last, goes_left);
    const auto cut = static_cast<std::uint32_t>(mid - rows_.data());
    ranges_.push_back({r.begin, cut});
    ranges_.push_back({cut, r.end});
  }

 private:
  struct Range {
    std::uint32_t begin;
    std::uint32_t end;
  };
  std::vector<std::uint32_t> rows_;
  std::vector<Range> ranges_;
};

// One trainable feature: either a direct column (binned over N rows) or a
// merged side feature (binned over U keys, reached through `join`).
struct TrainFeature {
  BinMapper* mapper = nullptr;
  const FeatureColumn* column = nullptr;
  BinnedColumn* binned = nullptr;
  const JoinIndex* join = nullptr;

  bool is_merged() const { return join != nullptr; }

  std::uint32_t bin_of_row(std::size_t row) const {
    if (join == nullptr) return binned->bin_at(row);
    const std::uint32_t ord = join->ordinal(row);
    if (ord == kMissingOrdinal) return mapper->missing_bin();
    return binned->bin_at(ord);
  }

  // Raw value as the tree predictor sees it: NaN for unmatched join rows.
  double value_of_row(std::size_t row) const {
    if (join == nullptr) return column->raw(row);
    const std::uint32_t ord = join->ordinal(row);
    if (ord == kMissingOrdinal) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    return column->raw(ord);
  }
};

struct FeatureSplitView {
  const Histogram* histogram = nullptr;
  const BinMapper* mapper = nullptr;
};

// Scans every feature's bins left to right, seeding the left side with the
// missing bin, and returns the best candidate subject to min_data_in_leaf
// and min_split_gain. Ties resolve to the lowest feature, then lowest bin.
std::optional<SplitInfo> find_best_split(
    const std::vector<FeatureSplitView>& features, const NodeStats& parent,
    const TreeConfig& config);

struct GrowResult {
  Tree tree;
  RowPartition partition;
  // Tree node id of the leaf containing each row, aligned with partition.
  std::vector<std::int32_t> leaf_of_row;
};

// Leaf-wise growth: repeatedly split the live leaf with the largest gain
// until max_leaves is reached or no leaf clears min_split_gain. Each taken
// split records a hit on its (feature, bin). Sibling histograms come from
// parent-minus-smaller-child subtraction.
GrowResult grow_tree(const std::vector<TrainFeature>& features,
                     const double* g, const double* h, std::size_t n_rows,
                     const TreeConfig& config,
                     MemoryTracker* tracker = nullptr);

}  // namespace histgbt
