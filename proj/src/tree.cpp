#include "histgbt/tree.hpp"

#include <numeric>
#include <utility>

#include "histgbt/kernels.hpp"

namespace histgbt {

std::size_t Tree::n_leaves() const {
  std::size_t n = 0;
  for (const TreeNode& node : nodes_) n += node.is_leaf() ? 1 : 0;
  return n;
}

RowPartition::RowPartition(std::size_t n_rows) {
  rows_.resize(n_rows);
  std::iota(rows_.begin(), rows_.end(), 0u);
  ranges_.push_back({0, static_cast<std::uint32_t>(n_rows)});
}

std::optional<SplitInfo> find_best_split(
    const std::vector<FeatureSplitView>& features, const NodeStats& parent,
    const TreeConfig& config) {
  std::optional<SplitInfo> best;
  for (std::size_t f = 0; f < features.size(); ++f) {
    const Histogram& hist = *features[f].histogram;
    const BinMapper& mapper = *features[f].mapper;
    const std::uint32_t n_finite = mapper.n_finite_bins();
    if (n_finite < 2) continue;

    // Missing rows sit on the left of every candidate, so they seed the
    // left-side accumulators before the finite scan.
    double g_left = 0.0, h_left = 0.0;
    std::size_t c_left = 0;
    if (mapper.has_missing_bin()) {
      const std::uint32_t mb = mapper.missing_bin();
      g_left = hist.sum_g(mb);
      h_left = hist.sum_h(mb);
      c_left = hist.count(mb);
    }
    for (std::uint32_t b = 0; b + 1 < n_finite; ++b) {
      g_left += hist.sum_g(b);
      h_left += hist.sum_h(b);
      c_left += hist.count(b);
      const double g_right = parent.sum_g - g_left;
      const double h_right = parent.sum_h - h_left;
      const std::size_t c_right = parent.count - c_left;
      if (c_left < config.min_data_in_leaf ||
          c_right < config.min_data_in_leaf) {
        continue;
      }
      const double gain = split_gain(g_left, h_left, g_right, h_right,
                                     parent.sum_g, parent.sum_h);
      if (gain <= config.min_split_gain) continue;
      if (best && gain <= best->gain) continue;
      SplitInfo info;
      info.feature_id = static_cast<std::uint32_t>(f);
      info.split_bin = b;
      info.threshold = mapper.boundaries()[b];
      info.gain = gain;
      info.left_stats = {g_left, h_left, c_left};
      info.right_stats = {g_right, h_right, c_right};
      best = info;
    }
  }
  return best;
}

namespace {

// Histogram over one node's rows for either feature kind; merged features
// accumulate through their join ordinals.
Histogram node_histogram(const TrainFeature& feature, const std::uint32_t* rows,
                         std::size_t n_rows, const double* g, const double* h,
                         MemoryTracker* tracker) {
  if (!feature.is_merged()) {
    return build_histogram(rows, n_rows, *feature.binned, g, h, tracker);
  }
  if (feature.binned->is_stale()) {
    throw Error(ErrorCode::StaleBinning,
                "merged feature was quantized under an older mapper version");
  }
  Histogram hist(feature.mapper->n_bins(), tracker);
  for (std::size_t i = 0; i < n_rows; ++i) {
    const std::uint32_t r = rows[i];
    hist.add(feature.bin_of_row(r), g[r], h[r]);
  }
  return hist;
}

struct LeafState {
  std::size_t node_id = 0;
  NodeStats stats;
  std::vector<Histogram> hists;
  std::optional<SplitInfo> best;
};

std::vector<FeatureSplitView> views_of(
    const std::vector<TrainFeature>& features,
    const std::vector<Histogram>& hists) {
  std::vector<FeatureSplitView> views(features.size());
  for (std::size_t f = 0; f < features.size(); ++f) {
    views[f] = {&hists[f], features[f].mapper};
  }
  return views;
}

}  // namespace

GrowResult grow_tree(const std::vector<TrainFeature>& features,
                     const double* g, const double* h, std::size_t n_rows,
                     const TreeConfig& config, MemoryTracker* tracker) {
  GrowResult result{Tree{}, RowPartition(n_rows), {}};
  Tree& tree = result.tree;
  RowPartition& partition = result.partition;
  tree.nodes().push_back(TreeNode{});

  std::vector<LeafState> live;
  {
    LeafState root;
    root.node_id = 0;
    root.stats = {kernels::sum(g, n_rows), kernels::sum(h, n_rows), n_rows};
    root.hists.reserve(features.size());
    for (const TrainFeature& f : features) {
      root.hists.push_back(node_histogram(f, partition.node_rows(0), n_rows,
                                          g, h, tracker));
    }
    root.best = find_best_split(views_of(features, root.hists), root.stats,
                                config);
    if (!root.best) root.hists.clear();
    live.push_back(std::move(root));
  }

  std::size_t n_leaves = 1;
  while (n_leaves < config.max_leaves) {
    std::size_t best_i = live.size();
    for (std::size_t i = 0; i < live.size(); ++i) {
      if (!live[i].best) continue;
      if (best_i == live.size() || live[i].best->gain > live[best_i].best->gain) {
        best_i = i;
      }
    }
    if (best_i == live.size()) break;

    LeafState leaf = std::move(live[best_i]);
    live.erase(live.begin() + static_cast<std::ptrdiff_t>(best_i));
    const SplitInfo split = *leaf.best;
    const TrainFeature& feat = features[split.feature_id];
    feat.mapper->record_split_hit(split.split_bin);

    const auto left_id = static_cast<std::int32_t>(tree.n_nodes());
    const auto right_id = left_id + 1;
    TreeNode& parent_node = tree.nodes()[leaf.node_id];
    parent_node.left = left_id;
    parent_node.right = right_id;
    parent_node.feature_id = split.feature_id;
    parent_node.threshold = split.threshold;
    parent_node.value = 0.0;
    tree.nodes().push_back(TreeNode{});
    tree.nodes().push_back(TreeNode{});

    const std::uint32_t split_bin = split.split_bin;
    const bool has_missing = feat.mapper->has_missing_bin();
    const std::uint32_t missing_bin =
        has_missing ? feat.mapper->missing_bin() : 0;
    partition.split(leaf.node_id, [&](std::uint32_t row) {
      const std::uint32_t b = feat.bin_of_row(row);
      return b <= split_bin || (has_missing && b == missing_bin);
    });
    ++n_leaves;

    // Build the smaller child's histograms directly; the sibling follows by
    // subtraction from the parent's, which are then released.
    const bool left_smaller =
        split.left_stats.count <= split.right_stats.count;
    const auto small_id =
        static_cast<std::size_t>(left_smaller ? left_id : right_id);
    const auto big_id =
        static_cast<std::size_t>(left_smaller ? right_id : left_id);

    std::vector<Histogram> small_hists;
    std::vector<Histogram> big_hists;
    small_hists.reserve(features.size());
    big_hists.reserve(features.size());
    for (std::size_t f = 0; f < features.size(); ++f) {
      small_hists.push_back(node_histogram(
          features[f], partition.node_rows(small_id),
          partition.node_count(small_id), g, h, tracker));
      big_hists.push_back(
          histogram_subtraction(leaf.hists[f], small_hists[f], tracker));
    }
    leaf.hists.clear();

    LeafState left_leaf;
    left_leaf.node_id = static_cast<std::size_t>(left_id);
    left_leaf.stats = split.left_stats;
    left_leaf.hists = left_smaller ? std::move(small_hists)
                                   : std::move(big_hists);
    LeafState right_leaf;
    right_leaf.node_id = static_cast<std::size_t>(right_id);
    right_leaf.stats = split.right_stats;
    right_leaf.hists = left_smaller ? std::move(big_hists)
                                    : std::move(small_hists);

    for (LeafState* child : {&left_leaf, &right_leaf}) {
      if (n_leaves < config.max_leaves) {
        child->best = find_best_split(views_of(features, child->hists),
                                      child->stats, config);
      }
      if (!child->best) child->hists.clear();
      live.push_back(std::move(*child));
    }
  }

  result.leaf_of_row.assign(n_rows, 0);
  for (const LeafState& leaf : live) {
    tree.nodes()[leaf.node_id].value =
        leaf_weight(leaf.stats.sum_g, leaf.stats.sum_h);
    const std::uint32_t* rows = partition.node_rows(leaf.node_id);
    const std::size_t count = partition.node_count(leaf.node_id);
    for (std::size_t i = 0; i < count; ++i) {
      result.leaf_of_row[rows[i]] = static_cast<std::int32_t>(leaf.node_id);
    }
  }
  return result;
}

}  // namespace histgbt
