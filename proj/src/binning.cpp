#include "histgbt/binning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "histgbt/kernels.hpp"

namespace histgbt {
namespace {

std::uint32_t next_pow2_above(std::size_t n) {
  std::uint32_t len = 1;
  while (len <= n) len <<= 1;
  return len;
}

// Median of a sorted multiset; the even case averages the two middle order
// statistics.
double sorted_median(const std::vector<double>& sorted) {
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return std::midpoint(sorted[n / 2 - 1], sorted[n / 2]);
}

}  // namespace

BinMapper::BinMapper(std::uint32_t feature_id, std::vector<double> boundaries,
                     bool has_missing_bin, std::uint32_t max_bins)
    : feature_id_(feature_id),
      boundaries_(std::move(boundaries)),
      has_missing_bin_(has_missing_bin),
      max_bins_(max_bins) {
  if (n_bins() > max_bins_) {
    throw Error(ErrorCode::ConfigError,
                std::to_string(n_bins()) + " bins exceed max_bins " +
                    std::to_string(max_bins_));
  }
  for (std::size_t i = 0; i + 1 < boundaries_.size(); ++i) {
    if (!(boundaries_[i] < boundaries_[i + 1])) {
      throw Error(ErrorCode::ConfigError, "boundaries not strictly increasing");
    }
  }
  split_hits_.assign(n_bins(), 0);
  rebuild_padded();
}

void BinMapper::rebuild_padded() {
  padded_.assign(next_pow2_above(boundaries_.size()),
                 std::numeric_limits<double>::infinity());
  std::copy(boundaries_.begin(), boundaries_.end(), padded_.begin());
}

std::uint32_t BinMapper::split_hits(std::uint32_t bin) const {
  if (bin >= n_bins()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "bin " + std::to_string(bin) + " >= n_bins " +
                    std::to_string(n_bins()));
  }
  return split_hits_[bin];
}

std::uint32_t BinMapper::bin_of(double value) const {
  if (!std::isfinite(value)) {
    if (!has_missing_bin_) {
      throw Error(ErrorCode::UnexpectedMissing,
                  "non-finite value in feature " + std::to_string(feature_id_) +
                      " which has no missing bin");
    }
    return missing_bin();
  }
  return static_cast<std::uint32_t>(
      std::lower_bound(boundaries_.begin(), boundaries_.end(), value) -
      boundaries_.begin());
}

std::uint32_t BinMapper::record_split_hit(std::uint32_t bin) {
  if (bin >= n_bins()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "bin " + std::to_string(bin) + " >= n_bins " +
                    std::to_string(n_bins()));
  }
  return ++split_hits_[bin];
}

ResizeResult BinMapper::adaptive_resize(std::uint32_t bin,
                                        const FeatureColumn& column) {
  if (bin >= n_bins()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "bin " + std::to_string(bin) + " >= n_bins " +
                    std::to_string(n_bins()));
  }
  if (has_missing_bin_ && bin == missing_bin()) {
    throw Error(ErrorCode::InvalidResizeTarget, "missing bin cannot resize");
  }
  split_hits_[bin] = 0;

  std::vector<double> in_bin;
  for (std::size_t i = 0; i < column.length(); ++i) {
    const double v = column.raw(i);
    if (std::isfinite(v) && bin_of(v) == bin) in_bin.push_back(v);
  }
  std::sort(in_bin.begin(), in_bin.end());
  std::vector<double> distinct;
  for (double v : in_bin) {
    if (distinct.empty() || distinct.back() != v) distinct.push_back(v);
  }
  if (distinct.size() < 2) return ResizeResult::ResizeNoop;
  const std::size_t n_distinct = distinct.size();
  const double median = sorted_median(in_bin);

  if (n_bins() < max_bins_) {
    // Divide: the new boundary sits at the median so tied values land in the
    // lower half; when the median equals the bin's largest distinct value the
    // boundary backs off to the last midpoint to keep both halves non-empty.
    double cut = median;
    if (cut >= distinct.back()) {
      cut = std::midpoint(distinct[n_distinct - 2], distinct.back());
    }
    const auto pos = std::lower_bound(boundaries_.begin(), boundaries_.end(),
                                      cut) -
                     boundaries_.begin();
    boundaries_.insert(boundaries_.begin() + pos, cut);
    split_hits_.insert(split_hits_.begin() + bin, 0);
    split_hits_[bin + 1] = 0;
    ++version_;
    rebuild_padded();
    return ResizeResult::Divided;
  }

  // Shrink: each existing boundary of the bin moves halfway toward the
  // median; a side with no boundary (feature range edge) stays open.
  bool changed = false;
  if (bin > 0) {
    const double moved = std::midpoint(boundaries_[bin - 1], median);
    if (moved != boundaries_[bin - 1]) {
      boundaries_[bin - 1] = moved;
      changed = true;
    }
  }
  if (bin < boundaries_.size()) {
    const double moved = std::midpoint(boundaries_[bin], median);
    if (moved != boundaries_[bin]) {
      boundaries_[bin] = moved;
      changed = true;
    }
  }
  if (!changed) return ResizeResult::ResizeNoop;
  ++version_;
  rebuild_padded();
  return ResizeResult::Shrunk;
}

BinMapper construct_bins(const FeatureColumn& column, std::uint32_t max_bins,
                         bool force_missing_bin) {
  if (max_bins < 2 || max_bins > kDefaultMaxBins) {
    throw Error(ErrorCode::ConfigError,
                "max_bins " + std::to_string(max_bins) + " outside [2, 256]");
  }
  std::vector<double> values;
  values.reserve(column.length());
  for (std::size_t i = 0; i < column.length(); ++i) {
    const double v = column.raw(i);
    if (std::isfinite(v)) values.push_back(v);
  }
  if (values.empty()) {
    throw Error(ErrorCode::AllMissing,
                "feature " + std::to_string(column.column_id()) +
                    " has no finite values");
  }
  const bool has_missing =
      force_missing_bin || values.size() != column.length();
  const std::uint32_t budget = max_bins - (has_missing ? 1 : 0);
  std::sort(values.begin(), values.end());

  std::vector<double> distinct = values;
  distinct.erase(std::unique(distinct.begin(), distinct.end()),
                 distinct.end());

  std::vector<double> boundaries;
  if (distinct.size() <= budget) {
    boundaries.reserve(distinct.size() - 1);
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
      boundaries.push_back(std::midpoint(distinct[i], distinct[i + 1]));
    }
  } else {
    // Equal-frequency cuts at ranks k·n/K, pushed right past ties so equal
    // values never straddle a boundary.
    const std::size_t n = values.size();
    std::size_t prev_cut = 0;
    for (std::uint32_t k = 1; k < budget; ++k) {
      std::size_t cut = (static_cast<std::size_t>(k) * n) / budget;
      while (cut < n && cut > 0 && values[cut] == values[cut - 1]) ++cut;
      if (cut <= prev_cut || cut >= n) continue;
      boundaries.push_back(std::midpoint(values[cut - 1], values[cut]));
      prev_cut = cut;
    }
  }
  return BinMapper(column.column_id(), std::move(boundaries), has_missing,
                   max_bins);
}

BinnedColumn::BinnedColumn(const FeatureColumn& column, const BinMapper& mapper,
                           BinningMode mode, MemoryTracker* tracker,
                           MemCategory category)
    : column_(&column),
      mapper_(&mapper),
      mode_(mode),
      mapper_version_(mapper.version()),
      tracker_(tracker),
      category_(category) {
  if (mode_ == BinningMode::BinCache) {
    cache_.resize(column.length());
    if (tracker_) tracker_->add(category_, cache_.size());
    fill_cache();
  }
}

void BinnedColumn::fill_cache() {
  const auto missing = static_cast<std::uint8_t>(mapper_->missing_bin());
  if (const double* f64 = column_->contiguous_f64()) {
    const std::size_t n_missing = kernels::bin_rows(
        f64, column_->length(), mapper_->padded_boundaries(),
        mapper_->padded_len(), missing, cache_.data());
    if (n_missing > 0 && !mapper_->has_missing_bin()) {
      throw Error(ErrorCode::UnexpectedMissing,
                  "non-finite value in feature " +
                      std::to_string(mapper_->feature_id()) +
                      " which has no missing bin");
    }
  } else {
    for (std::size_t i = 0; i < column_->length(); ++i) {
      cache_[i] = static_cast<std::uint8_t>(mapper_->bin_of(column_->raw(i)));
    }
  }
}

void BinnedColumn::requantize() {
  if (mode_ == BinningMode::BinCache) fill_cache();
  mapper_version_ = mapper_->version();
}

void BinnedColumn::release_tracking() {
  if (tracker_ && !cache_.empty()) {
    tracker_->release(category_, cache_.size());
  }
  tracker_ = nullptr;
}

BinnedColumn::~BinnedColumn() { release_tracking(); }

BinnedColumn::BinnedColumn(BinnedColumn&& other) noexcept
    : column_(other.column_),
      mapper_(other.mapper_),
      mode_(other.mode_),
      mapper_version_(other.mapper_version_),
      cache_(std::move(other.cache_)),
      tracker_(other.tracker_),
      category_(other.category_) {
  other.tracker_ = nullptr;
  other.cache_.clear();
}

BinnedColumn& BinnedColumn::operator=(BinnedColumn&& other) noexcept {
  if (this != &other) {
    release_tracking();
    column_ = other.column_;
    mapper_ = other.mapper_;
    mode_ = other.mode_;
    mapper_version_ = other.mapper_version_;
    cache_ = std::move(other.cache_);
    tracker_ = other.tracker_;
    category_ = other.category_;
    other.tracker_ = nullptr;
    other.cache_.clear();
  }
  return *this;
}

}  // namespace histgbt
