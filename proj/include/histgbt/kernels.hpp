#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops used by the training engine. Every operation has
// a scalar reference implementation; on x86-64 an AVX2 variant is selected at
// runtime when the CPU supports it. Element-wise operations are bit-identical
// across backends (the build disables FP contraction); reductions may differ
// in the last few ulps because lane accumulation reassociates the sum.
//
// Backend selection order: HISTGBT_KERNELS environment variable
// ("scalar"/"avx2") if set, otherwise the best variant the CPU supports.

namespace histgbt::kernels {

enum class Backend { Scalar, Avx2 };

struct Ops {
  // out[i] = a[i] - b[i]
  void (*subtract_f64)(const double* a, const double* b, double* out,
                       std::size_t n);
  void (*subtract_u32)(const std::uint32_t* a, const std::uint32_t* b,
                       std::uint32_t* out, std::size_t n);
  // g[i] = pred[i] - y[i], h[i] = 1
  void (*mse_gradients)(const double* pred, const double* y, double* g,
                        double* h, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  // sum of (pred[i] - y[i])^2
  double (*squared_error_sum)(const double* pred, const double* y,
                              std::size_t n);
  // Batched lower-bound search over bin boundaries. `padded` holds the
  // boundary array padded with +inf to `padded_len` (a power of two strictly
  // greater than the boundary count). Finite values map to the count of
  // boundaries < v; non-finite values map to `missing_bin`. Returns the
  // number of non-finite inputs.
  std::size_t (*bin_rows)(const double* values, std::size_t n,
                          const double* padded, std::uint32_t padded_len,
                          std::uint8_t missing_bin, std::uint8_t* out);
};

const Ops& ops();

Backend active_backend();
bool backend_available(Backend backend);
/// Test hook: pin the dispatch table to one backend for the process.
void force_backend(Backend backend);
const char* backend_name(Backend backend);

// Convenience wrappers over the active dispatch table.

inline void subtract(const double* a, const double* b, double* out,
                     std::size_t n) {
  ops().subtract_f64(a, b, out, n);
}

inline void subtract(const std::uint32_t* a, const std::uint32_t* b,
                     std::uint32_t* out, std::size_t n) {
  ops().subtract_u32(a, b, out, n);
}

inline void mse_gradients(const double* pred, const double* y, double* g,
                          double* h, std::size_t n) {
  ops().mse_gradients(pred, y, g, h, n);
}

inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  ops().axpy(alpha, x, y, n);
}

inline double sum(const double* x, std::size_t n) { return ops().sum(x, n); }

inline double squared_error_sum(const double* pred, const double* y,
                                std::size_t n) {
  return ops().squared_error_sum(pred, y, n);
}

inline std::size_t bin_rows(const double* values, std::size_t n,
                            const double* padded, std::uint32_t padded_len,
                            std::uint8_t missing_bin, std::uint8_t* out) {
  return ops().bin_rows(values, n, padded, padded_len, missing_bin, out);
}

namespace detail {
extern const Ops scalar_ops;
#if HISTGBT_HAVE_AVX2_TU
extern const Ops avx2_ops;
#endif
}  // namespace detail

}  // namespace histgbt::kernels
