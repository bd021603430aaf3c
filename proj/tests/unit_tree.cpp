#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "histgbt/tree.hpp"

using namespace histgbt;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

FeatureColumn col_of(const std::vector<double>& v) {
  return attach_column(v.data(), v.size(), 8);
}

std::vector<std::uint32_t> iota_rows(std::size_t n) {
  std::vector<std::uint32_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0u);
  return rows;
}

// Owns the mappers and binned columns that TrainFeature views point into.
struct TrainSetup {
  std::vector<std::unique_ptr<BinMapper>> mappers;
  std::vector<std::unique_ptr<BinnedColumn>> binned;
  std::vector<TrainFeature> features;

  void add(const FeatureColumn& column, std::uint32_t max_bins,
           BinningMode mode = BinningMode::BinCache) {
    mappers.push_back(std::make_unique<BinMapper>(
        construct_bins(column, max_bins)));
    binned.push_back(
        std::make_unique<BinnedColumn>(column, *mappers.back(), mode));
    features.push_back(
        {mappers.back().get(), &column, binned.back().get(), nullptr});
  }
};

// Brute-force split search: every candidate of every feature, left stats
// summed directly from bins (missing bin on the left), first maximum wins.
struct OracleSplit {
  bool found = false;
  std::uint32_t feature = 0;
  std::uint32_t bin = 0;
  double gain = 0.0;
};

OracleSplit oracle_best_split(const std::vector<FeatureSplitView>& views,
                              const TreeConfig& config) {
  OracleSplit best;
  for (std::size_t f = 0; f < views.size(); ++f) {
    const Histogram& hist = *views[f].histogram;
    const BinMapper& mapper = *views[f].mapper;
    const std::uint32_t n_finite = mapper.n_finite_bins();
    double gp = 0.0, hp = 0.0;
    for (std::uint32_t b = 0; b < hist.n_bins(); ++b) {
      gp += hist.sum_g(b);
      hp += hist.sum_h(b);
    }
    for (std::uint32_t b = 0; b + 1 < n_finite; ++b) {
      double gl = 0.0, hl = 0.0;
      std::size_t cl = 0, cr = 0;
      double gr = 0.0, hr = 0.0;
      if (mapper.has_missing_bin()) {
        const std::uint32_t mb = mapper.missing_bin();
        gl += hist.sum_g(mb);
        hl += hist.sum_h(mb);
        cl += hist.count(mb);
      }
      for (std::uint32_t k = 0; k < n_finite; ++k) {
        if (k <= b) {
          gl += hist.sum_g(k);
          hl += hist.sum_h(k);
          cl += hist.count(k);
        } else {
          gr += hist.sum_g(k);
          hr += hist.sum_h(k);
          cr += hist.count(k);
        }
      }
      if (cl < config.min_data_in_leaf || cr < config.min_data_in_leaf) {
        continue;
      }
      const double gain =
          0.5 * (gl * gl / (hl + 1e-10) + gr * gr / (hr + 1e-10) -
                 gp * gp / (hp + 1e-10));
      if (gain <= config.min_split_gain) continue;
      if (!best.found || gain > best.gain) {
        best = {true, static_cast<std::uint32_t>(f), b, gain};
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("histogram accumulates node rows per bin") {
  const std::vector<double> v = {1, 1, 2};
  const FeatureColumn col = col_of(v);
  const BinMapper m(0, {1.5}, false, 256);
  const BinnedColumn binned(col, m, BinningMode::BinCache);
  const std::vector<double> g = {1, 2, 3};
  const std::vector<double> h = {1, 1, 1};
  const auto rows = iota_rows(3);

  const Histogram hist =
      build_histogram(rows.data(), rows.size(), binned, g.data(), h.data());
  CHECK(hist.sum_g(0) == 3.0);
  CHECK(hist.sum_h(0) == 2.0);
  CHECK(hist.count(0) == 2);
  CHECK(hist.sum_g(1) == 3.0);
  CHECK(hist.sum_h(1) == 1.0);
  CHECK(hist.count(1) == 1);

  const NodeStats totals = hist.totals();
  CHECK(totals.sum_g == 6.0);
  CHECK(totals.sum_h == 3.0);
  CHECK(totals.count == 3);
}

TEST_CASE("empty row set gives an all-zero histogram") {
  const std::vector<double> v = {1, 2};
  const FeatureColumn col = col_of(v);
  const BinMapper m(0, {1.5}, false, 256);
  const BinnedColumn binned(col, m, BinningMode::BinCache);
  const double g[] = {1.0, 1.0};
  const Histogram hist = build_histogram(nullptr, 0, binned, g, g);
  for (std::uint32_t b = 0; b < hist.n_bins(); ++b) {
    CHECK(hist.sum_g(b) == 0.0);
    CHECK(hist.count(b) == 0);
  }
}

TEST_CASE("single row lands in its bin alone") {
  const std::vector<double> v = {0, 1, 2, 3, 4, 5};
  const FeatureColumn col = col_of(v);
  const BinMapper m(0, {0.5, 1.5, 2.5, 3.5, 4.5}, false, 256);
  const BinnedColumn binned(col, m, BinningMode::BinCache);
  const std::vector<double> g = {9, 9, 9, 9, 9, 7};
  const std::vector<double> h(6, 1.0);
  const std::uint32_t row5 = 5;
  const Histogram hist = build_histogram(&row5, 1, binned, g.data(), h.data());
  for (std::uint32_t b = 0; b < hist.n_bins(); ++b) {
    if (b == 5) {
      CHECK(hist.sum_g(b) == 7.0);
      CHECK(hist.count(b) == 1);
    } else {
      CHECK(hist.count(b) == 0);
    }
  }
}

TEST_CASE("stale binned columns are rejected") {
  const std::vector<double> v = {1, 2, 3, 4};
  const FeatureColumn col = col_of(v);
  BinMapper m(0, {2.5}, false, 256);
  const BinnedColumn binned(col, m, BinningMode::BinCache);
  m.adaptive_resize(0, col);
  const std::vector<double> g(4, 1.0);
  const auto rows = iota_rows(4);
  CHECK_THROWS_WITH_AS(
      build_histogram(rows.data(), 4, binned, g.data(), g.data()),
      doctest::Contains("StaleBinning"), Error);
}

TEST_CASE("histogram subtraction mirrors direct construction") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> vdist(-5.0, 5.0);
  std::uniform_real_distribution<double> gdist(-2.0, 2.0);
  std::vector<double> v(64);
  for (auto& x : v) x = vdist(rng);
  const FeatureColumn col = col_of(v);
  const BinMapper m = construct_bins(col, 8);
  const BinnedColumn binned(col, m, BinningMode::BinCache);
  std::vector<double> g(64), h(64);
  for (auto& x : g) x = gdist(rng);
  for (auto& x : h) x = std::abs(gdist(rng)) + 0.1;

  const auto all = iota_rows(64);
  std::vector<std::uint32_t> left, right;
  for (std::uint32_t r = 0; r < 64; ++r) {
    (rng() % 2 ? left : right).push_back(r);
  }
  const Histogram parent =
      build_histogram(all.data(), all.size(), binned, g.data(), h.data());
  const Histogram left_hist =
      build_histogram(left.data(), left.size(), binned, g.data(), h.data());
  const Histogram right_direct =
      build_histogram(right.data(), right.size(), binned, g.data(), h.data());
  const Histogram right_derived = histogram_subtraction(parent, left_hist);

  for (std::uint32_t b = 0; b < parent.n_bins(); ++b) {
    CHECK(right_derived.count(b) == right_direct.count(b));
    CHECK(right_derived.sum_g(b) ==
          doctest::Approx(right_direct.sum_g(b)).epsilon(1e-9));
    CHECK(right_derived.sum_h(b) ==
          doctest::Approx(right_direct.sum_h(b)).epsilon(1e-9));
  }

  const Histogram zero = histogram_subtraction(parent, parent);
  for (std::uint32_t b = 0; b < zero.n_bins(); ++b) {
    CHECK(zero.sum_g(b) == 0.0);
    CHECK(zero.count(b) == 0);
  }

  const Histogram other(parent.n_bins() + 1);
  CHECK_THROWS_WITH_AS(histogram_subtraction(parent, other),
                       doctest::Contains("ShapeMismatch"), Error);
}

TEST_CASE("leaf weight is the exact newton step") {
  CHECK(leaf_weight(-6.0, 3.0) == 2.0);
  CHECK(leaf_weight(0.0, 0.0) == 0.0);
  CHECK(leaf_weight(1.0, 2.0) == -0.5);
  CHECK(std::signbit(leaf_weight(0.0, 5.0)) == false);
}

TEST_CASE("two-bin histogram yields the expected split and gain") {
  const BinMapper m(0, {0.5}, false, 256);
  Histogram hist(2);
  hist.add(0, -2.0, 2.0);
  hist.add(0, 0.0, 0.0);
  hist.add(1, 2.0, 2.0);
  hist.add(1, 0.0, 0.0);
  const NodeStats parent{0.0, 4.0, 4};
  TreeConfig config;
  config.min_data_in_leaf = 1;

  const auto split = find_best_split({{&hist, &m}}, parent, config);
  REQUIRE(split.has_value());
  CHECK(split->split_bin == 0);
  CHECK(split->threshold == 0.5);
  CHECK(split->gain == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(split->left_stats.count == 2);
  CHECK(split->right_stats.count == 2);
}

TEST_CASE("zero gradients or strict row minimums give no split") {
  const BinMapper m(0, {0.5}, false, 256);
  Histogram hist(2);
  hist.add(0, 0.0, 1.0);
  hist.add(1, 0.0, 1.0);
  TreeConfig config;
  config.min_data_in_leaf = 1;
  CHECK_FALSE(find_best_split({{&hist, &m}}, {0.0, 2.0, 2}, config));

  Histogram hist2(2);
  hist2.add(0, -1.0, 1.0);
  hist2.add(1, 1.0, 1.0);
  config.min_data_in_leaf = 2;
  CHECK_FALSE(find_best_split({{&hist2, &m}}, {0.0, 2.0, 2}, config));
}

TEST_CASE("split search matches brute-force enumeration on random data") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 8 + rng() % 57;
    const std::size_t m = 1 + rng() % 4;
    const std::uint32_t max_bins = 2 + rng() % 7;

    std::vector<std::vector<double>> data(m);
    TrainSetup setup;
    for (auto& colv : data) {
      colv.resize(n);
      for (auto& x : colv) {
        x = (rng() % 20 == 0) ? kNaN : static_cast<double>(rng() % 12);
      }
      bool any_finite = false;
      for (double x : colv) any_finite |= std::isfinite(x);
      if (!any_finite) colv[0] = 1.0;
    }
    std::vector<FeatureColumn> cols;
    cols.reserve(m);
    for (const auto& colv : data) cols.push_back(col_of(colv));
    for (const auto& c : cols) setup.add(c, max_bins);

    std::vector<double> g(n), h(n);
    std::uniform_real_distribution<double> gdist(-2.0, 2.0);
    std::uniform_real_distribution<double> hdist(0.1, 2.0);
    for (auto& x : g) x = gdist(rng);
    for (auto& x : h) x = hdist(rng);

    const auto rows = iota_rows(n);
    std::vector<Histogram> hists;
    std::vector<FeatureSplitView> views;
    for (std::size_t f = 0; f < m; ++f) {
      hists.push_back(build_histogram(rows.data(), n, *setup.binned[f],
                                      g.data(), h.data()));
    }
    for (std::size_t f = 0; f < m; ++f) {
      views.push_back({&hists[f], setup.mappers[f].get()});
    }

    NodeStats parent{0.0, 0.0, n};
    for (std::size_t i = 0; i < n; ++i) {
      parent.sum_g += g[i];
      parent.sum_h += h[i];
    }
    TreeConfig config;
    config.min_data_in_leaf = 1 + rng() % 3;

    const auto got = find_best_split(views, parent, config);
    const OracleSplit want = oracle_best_split(views, config);
    REQUIRE(got.has_value() == want.found);
    if (want.found) {
      CHECK(got->feature_id == want.feature);
      CHECK(got->split_bin == want.bin);
      CHECK(got->gain == doctest::Approx(want.gain).epsilon(1e-9));
    }
  }
}

TEST_CASE("a two-leaf tree splits at the residual boundary") {
  const std::vector<double> x = {1, 2, 3, 4};
  const FeatureColumn col = col_of(x);
  TrainSetup setup;
  setup.add(col, 256);
  const std::vector<double> g = {0.5, 0.5, -0.5, -0.5};
  const std::vector<double> h(4, 1.0);
  TreeConfig config;
  config.max_leaves = 2;
  config.min_data_in_leaf = 1;

  const GrowResult grown =
      grow_tree(setup.features, g.data(), h.data(), 4, config);
  REQUIRE(grown.tree.n_leaves() == 2);
  const TreeNode& root = grown.tree.nodes()[0];
  CHECK(root.threshold == 2.5);
  CHECK(grown.tree.nodes()[root.left].value == -0.5);
  CHECK(grown.tree.nodes()[root.right].value == 0.5);
}

TEST_CASE("constant gradients grow a single-leaf tree") {
  const std::vector<double> x = {1, 2, 3, 4};
  const FeatureColumn col = col_of(x);
  TrainSetup setup;
  setup.add(col, 256);
  const std::vector<double> g(4, 0.0);
  const std::vector<double> h(4, 1.0);
  TreeConfig config;
  config.min_data_in_leaf = 1;
  const GrowResult grown =
      grow_tree(setup.features, g.data(), h.data(), 4, config);
  CHECK(grown.tree.n_leaves() == 1);
  CHECK(grown.tree.nodes()[0].value == 0.0);
}

TEST_CASE("max_leaves 1 grows a root-only tree with no split hits") {
  const std::vector<double> x = {1, 2, 3, 4};
  const FeatureColumn col = col_of(x);
  TrainSetup setup;
  setup.add(col, 256);
  const std::vector<double> g = {1, 1, -1, -1};
  const std::vector<double> h(4, 1.0);
  TreeConfig config;
  config.max_leaves = 1;
  config.min_data_in_leaf = 1;
  const GrowResult grown =
      grow_tree(setup.features, g.data(), h.data(), 4, config);
  CHECK(grown.tree.n_leaves() == 1);
  for (std::uint32_t b = 0; b < setup.mappers[0]->n_bins(); ++b) {
    CHECK(setup.mappers[0]->split_hits(b) == 0);
  }
  CHECK(grown.tree.nodes()[0].value == 0.0);
}

TEST_CASE("each taken split records a hit on its feature and bin") {
  const std::vector<double> x = {1, 2, 3, 4};
  const FeatureColumn col = col_of(x);
  TrainSetup setup;
  setup.add(col, 256);
  const std::vector<double> g = {0.5, 0.5, -0.5, -0.5};
  const std::vector<double> h(4, 1.0);
  TreeConfig config;
  config.max_leaves = 2;
  config.min_data_in_leaf = 1;
  const GrowResult grown =
      grow_tree(setup.features, g.data(), h.data(), 4, config);
  const TreeNode& root = grown.tree.nodes()[0];
  REQUIRE_FALSE(root.is_leaf());
  // Threshold 2.5 is the upper boundary of bin 1 (values {1,2,3,4} give one
  // bin per distinct value).
  CHECK(setup.mappers[0]->split_hits(1) == 1);
}

TEST_CASE("partition and prediction agree row by row, missing included") {
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> vdist(-3.0, 3.0);
  std::uniform_real_distribution<double> gdist(-1.0, 1.0);
  const std::size_t n = 300;

  std::vector<std::vector<double>> data(3);
  for (auto& colv : data) {
    colv.resize(n);
    for (auto& x : colv) x = (rng() % 15 == 0) ? kNaN : vdist(rng);
  }
  std::vector<FeatureColumn> cols;
  for (const auto& colv : data) cols.push_back(col_of(colv));
  TrainSetup setup;
  for (const auto& c : cols) setup.add(c, 16);

  std::vector<double> g(n), h(n, 1.0);
  for (auto& x : g) x = gdist(rng);
  TreeConfig config;
  config.max_leaves = 8;
  config.min_data_in_leaf = 5;

  const GrowResult grown =
      grow_tree(setup.features, g.data(), h.data(), n, config);

  // Every row's tree descent must reach the exact leaf the partition put it
  // in; this pins the bin/threshold equivalence and the missing-left rule.
  for (std::size_t row = 0; row < n; ++row) {
    const double pred = predict_tree(grown.tree, [&](std::uint32_t fid) {
      return setup.features[fid].value_of_row(row);
    });
    CHECK(pred == grown.tree.nodes()[grown.leaf_of_row[row]].value);
  }

  // Children partition each internal node's rows exactly.
  std::size_t leaf_total = 0;
  for (std::size_t nid = 0; nid < grown.tree.n_nodes(); ++nid) {
    const TreeNode& node = grown.tree.nodes()[nid];
    if (node.is_leaf()) {
      leaf_total += grown.partition.node_count(nid);
    } else {
      CHECK(grown.partition.node_count(nid) ==
            grown.partition.node_count(node.left) +
                grown.partition.node_count(node.right));
    }
  }
  CHECK(leaf_total == n);
}

TEST_CASE("predict_tree follows thresholds and routes missing left") {
  Tree tree;
  tree.nodes().push_back({1, 2, 0, 2.5, 0.0});
  tree.nodes().push_back({-1, -1, 0, 0.0, -0.5});
  tree.nodes().push_back({-1, -1, 0, 0.0, 0.5});

  CHECK(predict_tree(tree, [](std::uint32_t) { return 1.0; }) == -0.5);
  CHECK(predict_tree(tree, [](std::uint32_t) { return 2.5; }) == -0.5);
  CHECK(predict_tree(tree, [](std::uint32_t) { return 2.6; }) == 0.5);
  CHECK(predict_tree(tree, [](std::uint32_t) { return kNaN; }) == -0.5);

  Tree stump;
  stump.nodes().push_back({-1, -1, 0, 0.0, 0.7});
  CHECK(predict_tree(stump, [](std::uint32_t) { return 123.0; }) == 0.7);
}

TEST_CASE("accepted split gain equals the recomputed child improvement") {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> vdist(0.0, 10.0);
  std::uniform_real_distribution<double> gdist(-1.5, 1.5);
  const std::size_t n = 200;
  std::vector<double> v(n);
  for (auto& x : v) x = vdist(rng);
  const FeatureColumn col = col_of(v);
  TrainSetup setup;
  setup.add(col, 32);
  std::vector<double> g(n), h(n);
  for (auto& x : g) x = gdist(rng);
  for (auto& x : h) x = std::abs(gdist(rng)) + 0.2;

  const auto rows = iota_rows(n);
  const Histogram hist =
      build_histogram(rows.data(), n, *setup.binned[0], g.data(), h.data());
  NodeStats parent = hist.totals();
  parent.count = n;
  TreeConfig config;
  config.min_data_in_leaf = 10;
  const auto split =
      find_best_split({{&hist, setup.mappers[0].get()}}, parent, config);
  REQUIRE(split.has_value());

  const auto& l = split->left_stats;
  const auto& r = split->right_stats;
  const double recomputed =
      0.5 * (l.sum_g * l.sum_g / (l.sum_h + 1e-10) +
             r.sum_g * r.sum_g / (r.sum_h + 1e-10) -
             parent.sum_g * parent.sum_g / (parent.sum_h + 1e-10));
  CHECK(split->gain == doctest::Approx(recomputed).epsilon(1e-9));
  CHECK(l.count + r.count == parent.count);
  CHECK(split->gain >= 0.0);
}

TEST_CASE("histogram bytes are booked while instances are alive") {
  MemoryTracker tracker;
  {
    const Histogram hist(256, &tracker);
    CHECK(tracker.current_footprint().histogram_bytes == 5120);
  }
  CHECK(tracker.current_footprint().histogram_bytes == 0);
  CHECK(tracker.peak_footprint().histogram_bytes == 5120);
}
