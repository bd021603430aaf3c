#include "histgbt/histogram.hpp"

#include <string>

#include "histgbt/kernels.hpp"

namespace histgbt {

Histogram::Histogram(std::uint32_t n_bins, MemoryTracker* tracker)
    : sum_g_(n_bins, 0.0),
      sum_h_(n_bins, 0.0),
      count_(n_bins, 0),
      tracker_(tracker) {
  if (tracker_) tracker_->add(MemCategory::Histogram, bytes_for(n_bins));
}

void Histogram::release_tracking() {
  if (tracker_ && !count_.empty()) {
    tracker_->release(MemCategory::Histogram, bytes_for(n_bins()));
  }
  tracker_ = nullptr;
}

Histogram::~Histogram() { release_tracking(); }

Histogram::Histogram(Histogram&& other) noexcept
    : sum_g_(std::move(other.sum_g_)),
      sum_h_(std::move(other.sum_h_)),
      count_(std::move(other.count_)),
      tracker_(other.tracker_) {
  other.tracker_ = nullptr;
  other.count_.clear();
}

Histogram& Histogram::operator=(Histogram&& other) noexcept {
  if (this != &other) {
    release_tracking();
    sum_g_ = std::move(other.sum_g_);
    sum_h_ = std::move(other.sum_h_);
    count_ = std::move(other.count_);
    tracker_ = other.tracker_;
    other.tracker_ = nullptr;
    other.count_.clear();
  }
  return *this;
}

NodeStats Histogram::totals() const {
  NodeStats stats;
  stats.sum_g = kernels::sum(sum_g_.data(), sum_g_.size());
  stats.sum_h = kernels::sum(sum_h_.data(), sum_h_.size());
  for (std::uint32_t c : count_) stats.count += c;
  return stats;
}

Histogram build_histogram(const std::uint32_t* rows, std::size_t n_rows,
                          const BinnedColumn& binned, const double* g,
                          const double* h, MemoryTracker* tracker) {
  if (binned.is_stale()) {
    throw Error(ErrorCode::StaleBinning,
                "feature " + std::to_string(binned.feature_id()) +
                    " was quantized under an older mapper version");
  }
  Histogram hist(binned.mapper().n_bins(), tracker);
  if (const std::uint8_t* bins = binned.cache_data()) {
    for (std::size_t i = 0; i < n_rows; ++i) {
      const std::uint32_t r = rows[i];
      hist.add(bins[r], g[r], h[r]);
    }
  } else {
    for (std::size_t i = 0; i < n_rows; ++i) {
      const std::uint32_t r = rows[i];
      hist.add(binned.bin_at(r), g[r], h[r]);
    }
  }
  return hist;
}

Histogram histogram_subtraction(const Histogram& parent, const Histogram& child,
                                MemoryTracker* tracker) {
  if (parent.n_bins() != child.n_bins()) {
    throw Error(ErrorCode::ShapeMismatch,
                "histogram sizes " + std::to_string(parent.n_bins()) + " vs " +
                    std::to_string(child.n_bins()));
  }
  Histogram sibling(parent.n_bins(), tracker);
  const std::size_t n = parent.n_bins();
  kernels::subtract(parent.sum_g_data(), child.sum_g_data(),
                    sibling.sum_g_data(), n);
  kernels::subtract(parent.sum_h_data(), child.sum_h_data(),
                    sibling.sum_h_data(), n);
  kernels::subtract(parent.count_data(), child.count_data(),
                    sibling.count_data(), n);
  return sibling;
}

}  // namespace histgbt
