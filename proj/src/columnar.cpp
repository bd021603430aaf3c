#include "histgbt/columnar.hpp"

#include <algorithm>

namespace histgbt {

FeatureColumn::FeatureColumn(const void* buffer, std::size_t length,
                             std::size_t element_width)
    : buffer_(buffer), length_(length), element_width_(element_width) {
  if (length == 0) {
    throw Error(ErrorCode::EmptyColumn, "column has no rows");
  }
  if (element_width != 4 && element_width != 8) {
    throw Error(ErrorCode::UnsupportedWidth,
                "element width " + std::to_string(element_width) +
                    " (supported: 4, 8)");
  }
}

FeatureColumn attach_column(const void* buffer, std::size_t length,
                            std::size_t element_width) {
  return FeatureColumn(buffer, length, element_width);
}

void MemoryTracker::add(MemCategory category, std::size_t bytes) {
  const int c = static_cast<int>(category);
  const std::size_t now =
      current_[c].fetch_add(bytes, std::memory_order_relaxed) + bytes;
  std::size_t peak = peak_[c].load(std::memory_order_relaxed);
  while (now > peak &&
         !peak_[c].compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
  }
}

void MemoryTracker::release(MemCategory category, std::size_t bytes) {
  current_[static_cast<int>(category)].fetch_sub(bytes,
                                                 std::memory_order_relaxed);
}

namespace {
FootprintReport make_report(const std::atomic<std::size_t>* counters) {
  FootprintReport report;
  report.raw_value_bytes_copied =
      counters[static_cast<int>(MemCategory::RawValueCopied)].load();
  report.bin_cache_bytes =
      counters[static_cast<int>(MemCategory::BinCache)].load();
  report.histogram_bytes =
      counters[static_cast<int>(MemCategory::Histogram)].load();
  report.merge_structure_bytes =
      counters[static_cast<int>(MemCategory::MergeStructure)].load();
  report.gradient_bytes =
      counters[static_cast<int>(MemCategory::Gradient)].load();
  report.total_library_bytes =
      report.raw_value_bytes_copied + report.bin_cache_bytes +
      report.histogram_bytes + report.merge_structure_bytes +
      report.gradient_bytes;
  return report;
}
}  // namespace

FootprintReport MemoryTracker::current_footprint() const {
  return make_report(current_);
}

FootprintReport MemoryTracker::peak_footprint() const {
  return make_report(peak_);
}

std::uint32_t Dataset::add_column(std::string name, FeatureColumn column) {
  if (!columns_.empty() && column.length() != n_rows_) {
    throw Error(ErrorCode::ShapeMismatch,
                "column '" + name + "' has " +
                    std::to_string(column.length()) + " rows, dataset has " +
                    std::to_string(n_rows_));
  }
  if (std::find(names_.begin(), names_.end(), name) != names_.end()) {
    throw Error(ErrorCode::SchemaError, "duplicate feature name '" + name + "'");
  }
  if (labels_ != nullptr && column.length() != n_rows_) {
    throw Error(ErrorCode::ShapeMismatch,
                "column '" + name + "' does not match label length");
  }
  n_rows_ = column.length();
  const auto id = static_cast<std::uint32_t>(columns_.size());
  column.set_column_id(id);
  columns_.push_back(column);
  names_.push_back(std::move(name));
  return id;
}

void Dataset::set_labels(const double* labels, std::size_t n) {
  if (!columns_.empty() && n != n_rows_) {
    throw Error(ErrorCode::ShapeMismatch,
                "label length " + std::to_string(n) + " != row count " +
                    std::to_string(n_rows_));
  }
  labels_ = labels;
  n_rows_ = n;
}

std::size_t Dataset::feature_index(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) {
    throw Error(ErrorCode::SchemaError, "unknown feature '" + name + "'");
  }
  return static_cast<std::size_t>(it - names_.begin());
}

}  // namespace histgbt
