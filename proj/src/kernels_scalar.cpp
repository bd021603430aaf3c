#include <cmath>
#include <cstddef>
#include <cstdint>

#include "histgbt/kernels.hpp"

// Reference kernels. These define the semantics the vectorized variants are
// tested against.

namespace histgbt::kernels {
namespace {

void subtract_f64_scalar(const double* a, const double* b, double* out,
                         std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void subtract_u32_scalar(const std::uint32_t* a, const std::uint32_t* b,
                         std::uint32_t* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mse_gradients_scalar(const double* pred, const double* y, double* g,
                          double* h, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = pred[i] - y[i];
    h[i] = 1.0;
  }
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double squared_error_sum_scalar(const double* pred, const double* y,
                                std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = pred[i] - y[i];
    acc += d * d;
  }
  return acc;
}

std::size_t bin_rows_scalar(const double* values, std::size_t n,
                            const double* padded, std::uint32_t padded_len,
                            std::uint8_t missing_bin, std::uint8_t* out) {
  std::size_t n_missing = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = values[i];
    if (!std::isfinite(v)) {
      out[i] = missing_bin;
      ++n_missing;
      continue;
    }
    // Uniform binary search over the +inf-padded boundary array; the padding
    // entries never compare < v for finite v, so `pos` is the count of real
    // boundaries below v.
    std::uint32_t pos = 0;
    for (std::uint32_t step = padded_len >> 1; step > 0; step >>= 1) {
      if (padded[pos + step - 1] < v) pos += step;
    }
    out[i] = static_cast<std::uint8_t>(pos);
  }
  return n_missing;
}

}  // namespace

namespace detail {
const Ops scalar_ops = {
    subtract_f64_scalar,  subtract_u32_scalar, mse_gradients_scalar,
    axpy_scalar,          sum_scalar,          squared_error_sum_scalar,
    bin_rows_scalar,
};
}  // namespace detail

}  // namespace histgbt::kernels
