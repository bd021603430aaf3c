#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "histgbt/error.hpp"

// Columnar view over caller-owned feature buffers. The library never copies
// raw feature values in zero-copy mode; every byte it does allocate is booked
// against one of the MemCategory counters so peak usage can be audited.

namespace histgbt {

// One feature backed by a caller buffer of 4- or 8-byte floating values.
// The buffer must outlive every session that references the column.
class FeatureColumn {
 public:
  FeatureColumn() = default;
  FeatureColumn(const void* buffer, std::size_t length,
                std::size_t element_width);

  // Unchecked read; callers must have validated `row < length()` up front.
  double raw(std::size_t row) const {
    if (element_width_ == 8) {
      return static_cast<const double*>(buffer_)[row];
    }
    return static_cast<const float*>(buffer_)[row];
  }

  // Checked read.
  double at(std::size_t row) const {
    if (row >= length_) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "row " + std::to_string(row) + " >= length " +
                      std::to_string(length_));
    }
    return raw(row);
  }

  std::size_t length() const { return length_; }
  std::size_t element_width() const { return element_width_; }
  std::uint32_t column_id() const { return column_id_; }
  void set_column_id(std::uint32_t id) { column_id_ = id; }

  // Direct buffer access for the 8-byte case so batch kernels can run on the
  // caller's memory in place; nullptr when the column is 4-byte.
  const double* contiguous_f64() const {
    return element_width_ == 8 ? static_cast<const double*>(buffer_) : nullptr;
  }

 private:
  const void* buffer_ = nullptr;
  std::size_t length_ = 0;
  std::size_t element_width_ = 0;
  std::uint32_t column_id_ = 0;
};

FeatureColumn attach_column(const void* buffer, std::size_t length,
                            std::size_t element_width);

inline double read_value(const FeatureColumn& column, std::size_t row) {
  return column.at(row);
}

enum class MemCategory : int {
  RawValueCopied = 0,
  BinCache = 1,
  Histogram = 2,
  MergeStructure = 3,
  Gradient = 4,
};
inline constexpr int kMemCategoryCount = 5;

struct FootprintReport {
  std::size_t raw_value_bytes_copied = 0;
  std::size_t bin_cache_bytes = 0;
  std::size_t histogram_bytes = 0;
  std::size_t merge_structure_bytes = 0;
  std::size_t gradient_bytes = 0;
  std::size_t total_library_bytes = 0;
};

// Explicit counters updated at each allocation site. Peaks are monotonic;
// current values fall when tracked structures are released.
class MemoryTracker {
 public:
  void add(MemCategory category, std::size_t bytes);
  void release(MemCategory category, std::size_t bytes);

  FootprintReport current_footprint() const;
  FootprintReport peak_footprint() const;

 private:
  std::atomic<std::size_t> current_[kMemCategoryCount] = {};
  std::atomic<std::size_t> peak_[kMemCategoryCount] = {};
};

inline FootprintReport memory_footprint(const MemoryTracker& tracker) {
  return tracker.current_footprint();
}

// Non-owning bundle of feature columns plus a label view. All columns and
// the label buffer must share the same row count.
class Dataset {
 public:
  std::uint32_t add_column(std::string name, FeatureColumn column);
  void set_labels(const double* labels, std::size_t n);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_features() const { return columns_.size(); }
  const FeatureColumn& column(std::size_t j) const { return columns_[j]; }
  const std::string& feature_name(std::size_t j) const { return names_[j]; }
  const std::vector<std::string>& feature_names() const { return names_; }
  const double* labels() const { return labels_; }
  bool has_labels() const { return labels_ != nullptr; }

  // Index of a named feature; SchemaError when absent.
  std::size_t feature_index(const std::string& name) const;

 private:
  std::vector<FeatureColumn> columns_;
  std::vector<std::string> names_;
  const double* labels_ = nullptr;
  std::size_t n_rows_ = 0;
};

}  // namespace histgbt
