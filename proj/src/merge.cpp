#include "histgbt/merge.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace histgbt {

JoinIndex::JoinIndex(std::vector<std::uint32_t> ordinals,
                     MemoryTracker* tracker)
    : ordinals_(std::move(ordinals)), tracker_(tracker) {
  if (tracker_) {
    tracker_->add(MemCategory::MergeStructure, ordinals_.size() * 4);
  }
}

void JoinIndex::release_tracking() {
  if (tracker_ && !ordinals_.empty()) {
    tracker_->release(MemCategory::MergeStructure, ordinals_.size() * 4);
  }
  tracker_ = nullptr;
}

JoinIndex::~JoinIndex() { release_tracking(); }

JoinIndex::JoinIndex(JoinIndex&& other) noexcept
    : ordinals_(std::move(other.ordinals_)), tracker_(other.tracker_) {
  other.tracker_ = nullptr;
  other.ordinals_.clear();
}

JoinIndex& JoinIndex::operator=(JoinIndex&& other) noexcept {
  if (this != &other) {
    release_tracking();
    ordinals_ = std::move(other.ordinals_);
    tracker_ = other.tracker_;
    other.tracker_ = nullptr;
    other.ordinals_.clear();
  }
  return *this;
}

std::uint32_t SideTable::lookup(double key) const {
  const auto it = key_to_ordinal_.find(key);
  return it == key_to_ordinal_.end() ? kMissingOrdinal : it->second;
}

SideTable register_side_table(
    std::uint32_t table_id, std::vector<double> keys,
    std::vector<std::pair<std::string, FeatureColumn>> features,
    std::uint32_t max_bins, MemoryTracker* tracker) {
  SideTable side;
  side.table_id_ = table_id;
  side.key_to_ordinal_.reserve(keys.size());
  for (std::size_t u = 0; u < keys.size(); ++u) {
    const auto [it, inserted] =
        side.key_to_ordinal_.emplace(keys[u], static_cast<std::uint32_t>(u));
    if (!inserted) {
      throw Error(ErrorCode::DuplicateKey,
                  "side table key " + std::to_string(keys[u]) +
                      " appears more than once");
    }
  }
  side.keys_ = std::move(keys);

  side.features_.reserve(features.size());
  for (auto& [name, column] : features) {
    if (column.length() != side.keys_.size()) {
      throw Error(ErrorCode::ShapeMismatch,
                  "side feature '" + name + "' has " +
                      std::to_string(column.length()) + " rows, keys " +
                      std::to_string(side.keys_.size()));
    }
    SideTable::SideFeature feat;
    feat.name = std::move(name);
    feat.column = column;
    feat.mapper = std::make_unique<BinMapper>(
        construct_bins(column, max_bins, /*force_missing_bin=*/true));
    feat.binned = std::make_unique<BinnedColumn>(
        feat.column, *feat.mapper, BinningMode::BinCache, tracker,
        MemCategory::MergeStructure);
    side.features_.push_back(std::move(feat));
  }
  return side;
}

JoinIndex build_join_index(const FeatureColumn& main_key_column,
                           const SideTable& side, MemoryTracker* tracker) {
  std::vector<std::uint32_t> ordinals(main_key_column.length());
  for (std::size_t i = 0; i < ordinals.size(); ++i) {
    const double key = main_key_column.raw(i);
    ordinals[i] = std::isnan(key) ? kMissingOrdinal : side.lookup(key);
  }
  return JoinIndex(std::move(ordinals), tracker);
}

double MergedFeature::virtual_value(std::size_t row) const {
  const std::uint32_t ord = join->ordinal(row);
  if (ord == kMissingOrdinal) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return side->feature(side_feature).column.raw(ord);
}

Histogram implicit_histogram(const std::uint32_t* rows, std::size_t n_rows,
                             const MergedFeature& merged, const double* g,
                             const double* h, MemoryTracker* tracker) {
  const SideTable::SideFeature& feat = merged.side->feature(merged.side_feature);
  if (feat.binned->is_stale()) {
    throw Error(ErrorCode::StaleBinning,
                "side feature '" + feat.name +
                    "' was quantized under an older mapper version");
  }
  const std::uint8_t* side_bins = feat.binned->cache_data();
  const auto missing_bin =
      static_cast<std::uint8_t>(feat.mapper->missing_bin());
  Histogram hist(feat.mapper->n_bins(), tracker);
  for (std::size_t i = 0; i < n_rows; ++i) {
    const std::uint32_t r = rows[i];
    const std::uint32_t ord = merged.join->ordinal(r);
    const std::uint8_t bin =
        ord == kMissingOrdinal ? missing_bin : side_bins[ord];
    hist.add(bin, g[r], h[r]);
  }
  return hist;
}

MaterializedMerge::MaterializedMerge(std::vector<std::string> names,
                                     std::vector<std::vector<double>> columns,
                                     MemoryTracker* tracker)
    : names_(std::move(names)),
      columns_(std::move(columns)),
      tracker_(tracker) {
  if (tracker_) {
    for (const auto& c : columns_) {
      tracker_->add(MemCategory::RawValueCopied, c.size() * 8);
    }
  }
}

void MaterializedMerge::release_tracking() {
  if (tracker_) {
    for (const auto& c : columns_) {
      tracker_->release(MemCategory::RawValueCopied, c.size() * 8);
    }
  }
  tracker_ = nullptr;
}

MaterializedMerge::~MaterializedMerge() { release_tracking(); }

MaterializedMerge::MaterializedMerge(MaterializedMerge&& other) noexcept
    : names_(std::move(other.names_)),
      columns_(std::move(other.columns_)),
      tracker_(other.tracker_) {
  other.tracker_ = nullptr;
  other.columns_.clear();
}

MaterializedMerge materialize_merge(const FeatureColumn& main_key_column,
                                    const SideTable& side,
                                    MemoryTracker* tracker) {
  const JoinIndex join = build_join_index(main_key_column, side);
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  names.reserve(side.n_features());
  columns.reserve(side.n_features());
  for (std::size_t j = 0; j < side.n_features(); ++j) {
    MergedFeature virtual_col{&side, j, &join};
    std::vector<double> expanded(main_key_column.length());
    for (std::size_t i = 0; i < expanded.size(); ++i) {
      expanded[i] = virtual_col.virtual_value(i);
    }
    names.push_back(side.feature(j).name);
    columns.push_back(std::move(expanded));
  }
  return MaterializedMerge(std::move(names), std::move(columns), tracker);
}

}  // namespace histgbt
