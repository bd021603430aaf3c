#pragma once

#include <cstdint>
#include <vector>

#include "histgbt/binning.hpp"
#include "histgbt/columnar.hpp"

// Per-bin gradient accumulators and the split-gain arithmetic built on them.

namespace histgbt {

// Division guard used by the gain formula and the zero-hessian leaf case.
// A numerical constant, not a regularization knob.
inline constexpr double kEpsilonGuard = 1e-10;

struct GradientPair {
  double g = 0.0;
  double h = 0.0;
};

struct NodeStats {
  double sum_g = 0.0;
  double sum_h = 0.0;
  std::size_t count = 0;
};

// Bin-indexed Σg / Σh / count accumulators, 20 bytes per bin, booked as
// histogram_bytes for the lifetime of the instance.
class Histogram {
 public:
  explicit Histogram(std::uint32_t n_bins, MemoryTracker* tracker = nullptr);
  ~Histogram();

  Histogram(Histogram&& other) noexcept;
  Histogram& operator=(Histogram&& other) noexcept;
  Histogram(const Histogram&) = delete;
  Histogram& operator=(const Histogram&) = delete;

  std::uint32_t n_bins() const {
    return static_cast<std::uint32_t>(count_.size());
  }
  double sum_g(std::uint32_t bin) const { return sum_g_[bin]; }
  double sum_h(std::uint32_t bin) const { return sum_h_[bin]; }
  std::uint32_t count(std::uint32_t bin) const { return count_[bin]; }

  void add(std::uint32_t bin, double g, double h) {
    sum_g_[bin] += g;
    sum_h_[bin] += h;
    ++count_[bin];
  }

  NodeStats totals() const;

  const double* sum_g_data() const { return sum_g_.data(); }
  const double* sum_h_data() const { return sum_h_.data(); }
  const std::uint32_t* count_data() const { return count_.data(); }
  double* sum_g_data() { return sum_g_.data(); }
  double* sum_h_data() { return sum_h_.data(); }
  std::uint32_t* count_data() { return count_.data(); }

  static std::size_t bytes_for(std::uint32_t n_bins) {
    return static_cast<std::size_t>(n_bins) * 20;
  }

 private:
  void release_tracking();

  std::vector<double> sum_g_;
  std::vector<double> sum_h_;
  std::vector<std::uint32_t> count_;
  MemoryTracker* tracker_ = nullptr;
};

// Accumulates node rows into per-bin sums; `rows` lists row indices of the
// node. Rejects a binned column whose mapper has resized since quantization.
Histogram build_histogram(const std::uint32_t* rows, std::size_t n_rows,
                          const BinnedColumn& binned, const double* g,
                          const double* h, MemoryTracker* tracker = nullptr);

// Sibling histogram: per-bin parent minus child for all three accumulators.
Histogram histogram_subtraction(const Histogram& parent, const Histogram& child,
                                MemoryTracker* tracker = nullptr);

// Newton step −G/H. The epsilon guard only matters for zero-hessian leaves;
// positive-hessian leaves divide exactly so the mean-residual identity of
// the squared-error objective holds to full precision.
inline double leaf_weight(double sum_g, double sum_h) {
  if (sum_h > 0.0) {
    const double w = -sum_g / sum_h;
    return w == 0.0 ? 0.0 : w;
  }
  if (sum_g == 0.0) return 0.0;
  return -sum_g / kEpsilonGuard;
}

// Split improvement ½(G_L²/(H_L+ε) + G_R²/(H_R+ε) − G_P²/(H_P+ε)).
inline double split_gain(double g_left, double h_left, double g_right,
                         double h_right, double g_parent, double h_parent) {
  return 0.5 * (g_left * g_left / (h_left + kEpsilonGuard) +
                g_right * g_right / (h_right + kEpsilonGuard) -
                g_parent * g_parent / (h_parent + kEpsilonGuard));
}

}  // namespace histgbt
