#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>

#include "histgbt/kernels.hpp"

// AVX2 kernel variants. Element-wise kernels use plain mul/add (no FMA) so
// they stay bit-identical to the scalar reference; reductions keep four lane
// accumulators and fold them at the end.

namespace histgbt::kernels {
namespace {

void subtract_f64_avx2(const double* a, const double* b, double* out,
                       std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d va = _mm256_loadu_pd(a + i);
    const __m256d vb = _mm256_loadu_pd(b + i);
    _mm256_storeu_pd(out + i, _mm256_sub_pd(va, vb));
  }
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void subtract_u32_avx2(const std::uint32_t* a, const std::uint32_t* b,
                       std::uint32_t* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256i va =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i),
                        _mm256_sub_epi32(va, vb));
  }
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mse_gradients_avx2(const double* pred, const double* y, double* g,
                        double* h, std::size_t n) {
  const __m256d ones = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vp = _mm256_loadu_pd(pred + i);
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(g + i, _mm256_sub_pd(vp, vy));
    _mm256_storeu_pd(h + i, ones);
  }
  for (; i < n; ++i) {
    g[i] = pred[i] - y[i];
    h[i] = 1.0;
  }
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double fold_lanes(__m256d acc) {
  const __m128d lo = _mm256_castpd256_pd128(acc);
  const __m128d hi = _mm256_extractf128_pd(acc, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  }
  double total = fold_lanes(acc);
  for (; i < n; ++i) total += x[i];
  return total;
}

double squared_error_sum_avx2(const double* pred, const double* y,
                              std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_loadu_pd(pred + i), _mm256_loadu_pd(y + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double total = fold_lanes(acc);
  for (; i < n; ++i) {
    const double d = pred[i] - y[i];
    total += d * d;
  }
  return total;
}

std::size_t bin_rows_avx2(const double* values, std::size_t n,
                          const double* padded, std::uint32_t padded_len,
                          std::uint8_t missing_bin, std::uint8_t* out) {
  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(
      static_cast<long long>(0x7fffffffffffffffULL)));
  std::size_t n_missing = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(values + i);
    // Gather-based uniform binary search, four rows per pass. Non-finite
    // lanes never satisfy a < comparison, so their positions stay in range.
    __m256i pos = _mm256_setzero_si256();
    for (std::uint32_t step = padded_len >> 1; step > 0; step >>= 1) {
      const __m256i idx =
          _mm256_add_epi64(pos, _mm256_set1_epi64x(static_cast<long long>(step) - 1));
      const __m256d bounds = _mm256_i64gather_pd(padded, idx, 8);
      const __m256d lt = _mm256_cmp_pd(bounds, v, _CMP_LT_OQ);
      const __m256i advance = _mm256_and_si256(
          _mm256_castpd_si256(lt), _mm256_set1_epi64x(static_cast<long long>(step)));
      pos = _mm256_add_epi64(pos, advance);
    }
    const __m256d finite =
        _mm256_cmp_pd(_mm256_and_pd(v, abs_mask), inf, _CMP_LT_OQ);
    const int finite_mask = _mm256_movemask_pd(finite);

    alignas(32) std::int64_t lanes[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), pos);
    for (int lane = 0; lane < 4; ++lane) {
      if (finite_mask & (1 << lane)) {
        out[i + lane] = static_cast<std::uint8_t>(lanes[lane]);
      } else {
        out[i + lane] = missing_bin;
        ++n_missing;
      }
    }
  }
  for (; i < n; ++i) {
    const double v = values[i];
    if (!std::isfinite(v)) {
      out[i] = missing_bin;
      ++n_missing;
      continue;
    }
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
const Ops avx2_ops = {
    subtract_f64_avx2,  subtract_u32_avx2, mse_gradients_avx2,
    axpy_avx2,          sum_avx2,          squared_error_sum_avx2,
    bin_rows_avx2,
};
}  // namespace detail

}  // namespace histgbt::kernels
