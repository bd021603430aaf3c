#pragma once

#include <cstdint>
#include <vector>

#include "histgbt/columnar.hpp"

// Per-feature quantization: equal-frequency bin construction, row binning in
// cache or zero-copy mode, and the split-hit driven resize that divides hot
// bins (below the bin cap) or shrinks them (at the cap).

namespace histgbt {

inline constexpr std::uint32_t kDefaultMaxBins = 256;
inline constexpr std::uint32_t kDefaultSplitHitThreshold = 32;

enum class ResizeResult { Divided, Shrunk, ResizeNoop };

class BinMapper {
 public:
  // Finite bins are the right-closed intervals induced by `boundaries`; the
  // missing bin, when present, is always the last index.
  BinMapper(std::uint32_t feature_id, std::vector<double> boundaries,
            bool has_missing_bin, std::uint32_t max_bins);

  std::uint32_t feature_id() const { return feature_id_; }
  std::uint32_t n_bins() const {
    return static_cast<std::uint32_t>(boundaries_.size()) + 1 +
           (has_missing_bin_ ? 1 : 0);
  }
  std::uint32_t n_finite_bins() const {
    return static_cast<std::uint32_t>(boundaries_.size()) + 1;
  }
  bool has_missing_bin() const { return has_missing_bin_; }
  std::uint32_t missing_bin() const { return n_finite_bins(); }
  std::uint32_t max_bins() const { return max_bins_; }
  std::uint64_t version() const { return version_; }
  const std::vector<double>& boundaries() const { return boundaries_; }
  std::uint32_t split_hits(std::uint32_t bin) const;

  // Bin index of one raw value: count of boundaries < value, so each bin is
  // left-open right-closed. Non-finite values go to the missing bin.
  std::uint32_t bin_of(double value) const;

  // Boundaries padded with +inf to a power of two, as consumed by the batch
  // search kernel.
  const double* padded_boundaries() const { return padded_.data(); }
  std::uint32_t padded_len() const {
    return static_cast<std::uint32_t>(padded_.size());
  }

  std::uint32_t record_split_hit(std::uint32_t bin);

  // Divides `bin` at the in-bin median while below max_bins, otherwise pulls
  // both of its boundaries halfway toward that median (boundaries at the
  // feature range edges stay put). Resets the bin's hit counter either way;
  // bumps the version only when boundaries actually changed.
  ResizeResult adaptive_resize(std::uint32_t bin, const FeatureColumn& column);

 private:
  void rebuild_padded();

  std::uint32_t feature_id_ = 0;
  std::vector<double> boundaries_;
  std::vector<double> padded_;
  std::vector<std::uint32_t> split_hits_;
  bool has_missing_bin_ = false;
  std::uint32_t max_bins_ = kDefaultMaxBins;
  std::uint64_t version_ = 0;
};

// force_missing_bin reserves the missing slot even when the column holds no
// non-finite value; merge join misses need it at unique-key granularity.
BinMapper construct_bins(const FeatureColumn& column, std::uint32_t max_bins,
                         bool force_missing_bin = false);

enum class BinningMode { BinCache, ZeroCopy };

// Row-to-bin view of one feature. BinCache stores one byte per row (booked
// against `category`, bin_cache_bytes unless the cache belongs to a merge
// structure); ZeroCopy stores nothing and searches boundaries on every read.
// mapper_version detects staleness after a resize.
class BinnedColumn {
 public:
  BinnedColumn(const FeatureColumn& column, const BinMapper& mapper,
               BinningMode mode, MemoryTracker* tracker = nullptr,
               MemCategory category = MemCategory::BinCache);
  ~BinnedColumn();

  BinnedColumn(BinnedColumn&& other) noexcept;
  BinnedColumn& operator=(BinnedColumn&& other) noexcept;
  BinnedColumn(const BinnedColumn&) = delete;
  BinnedColumn& operator=(const BinnedColumn&) = delete;

  std::uint32_t bin_at(std::size_t row) const {
    if (mode_ == BinningMode::BinCache) return cache_[row];
    return mapper_->bin_of(column_->raw(row));
  }

  BinningMode mode() const { return mode_; }
  std::uint32_t feature_id() const { return mapper_->feature_id(); }
  std::uint64_t mapper_version() const { return mapper_version_; }
  bool is_stale() const { return mapper_version_ != mapper_->version(); }
  const BinMapper& mapper() const { return *mapper_; }
  std::size_t n_rows() const { return column_->length(); }

  // Cache-mode index array for hot accumulation loops; nullptr in zero-copy.
  const std::uint8_t* cache_data() const {
    return mode_ == BinningMode::BinCache ? cache_.data() : nullptr;
  }

  // Recomputes cached indices (or just restamps in zero-copy mode) against
  // the mapper's current boundaries.
  void requantize();

 private:
  void fill_cache();
  void release_tracking();

  const FeatureColumn* column_ = nullptr;
  const BinMapper* mapper_ = nullptr;
  BinningMode mode_ = BinningMode::BinCache;
  std::uint64_t mapper_version_ = 0;
  std::vector<std::uint8_t> cache_;
  MemoryTracker* tracker_ = nullptr;
  MemCategory category_ = MemCategory::BinCache;
};

inline BinnedColumn quantize(const FeatureColumn& column,
                             const BinMapper& mapper, BinningMode mode,
                             MemoryTracker* tracker = nullptr) {
  return BinnedColumn(column, mapper, mode, tracker);
}

}  // namespace histgbt
