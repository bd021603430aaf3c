#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "histgbt/binning.hpp"

using namespace histgbt;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

FeatureColumn col_of(const std::vector<double>& v) {
  return attach_column(v.data(), v.size(), 8);
}

// Reference bin lookup: linear scan over boundaries, right-closed intervals.
std::uint32_t linear_bin(const std::vector<double>& bounds, double v) {
  std::uint32_t b = 0;
  while (b < bounds.size() && v > bounds[b]) ++b;
  return b;
}

}  // namespace

TEST_CASE("single distinct value yields one bin with no boundaries") {
  const std::vector<double> v = {5, 5, 5, 5};
  const BinMapper m = construct_bins(col_of(v), 4);
  CHECK(m.n_bins() == 1);
  CHECK(m.boundaries().empty());
  CHECK_FALSE(m.has_missing_bin());
}

TEST_CASE("equal-frequency construction places midpoint boundaries") {
  const std::vector<double> v = {1, 2, 3, 4};
  const BinMapper m = construct_bins(col_of(v), 2);
  REQUIRE(m.boundaries().size() == 1);
  CHECK(m.boundaries()[0] == 2.5);
  CHECK(m.n_bins() == 2);
}

TEST_CASE("few distinct values get one bin per value") {
  const std::vector<double> v = {3, 1, 3, 2, 1, 2, 3};
  const BinMapper m = construct_bins(col_of(v), 256);
  REQUIRE(m.boundaries().size() == 2);
  CHECK(m.boundaries()[0] == 1.5);
  CHECK(m.boundaries()[1] == 2.5);
  CHECK(m.n_bins() == 3);
}

TEST_CASE("1000 uniform values at 256 bins give balanced occupancy") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(1000);
  for (auto& x : v) x = dist(rng);
  const BinMapper m = construct_bins(col_of(v), 256);
  CHECK(m.n_bins() == 256);
  std::vector<int> occupancy(m.n_bins(), 0);
  for (double x : v) ++occupancy[m.bin_of(x)];
  for (std::uint32_t b = 0; b < m.n_bins(); ++b) {
    CHECK(occupancy[b] >= 3);
    CHECK(occupancy[b] <= 5);
  }
}

TEST_CASE("all-missing column is rejected") {
  const std::vector<double> v = {kNaN, kNaN};
  CHECK_THROWS_WITH_AS(construct_bins(col_of(v), 16),
                       doctest::Contains("AllMissing"), Error);
}

TEST_CASE("missing bin is appended exactly when non-finite values exist") {
  const std::vector<double> with = {1, 2, kNaN};
  const BinMapper m1 = construct_bins(col_of(with), 16);
  CHECK(m1.has_missing_bin());
  CHECK(m1.missing_bin() == m1.n_bins() - 1);
  CHECK(m1.bin_of(kNaN) == m1.missing_bin());
  CHECK(m1.bin_of(std::numeric_limits<double>::infinity()) == m1.missing_bin());

  const std::vector<double> without = {1, 2};
  const BinMapper m2 = construct_bins(col_of(without), 16);
  CHECK_FALSE(m2.has_missing_bin());
  CHECK_THROWS_WITH_AS(m2.bin_of(kNaN), doctest::Contains("UnexpectedMissing"),
                       Error);
}

TEST_CASE("bin_of uses right-closed intervals") {
  const BinMapper m(0, {2.5}, false, 256);
  CHECK(m.bin_of(2.4) == 0);
  CHECK(m.bin_of(2.5) == 0);
  CHECK(m.bin_of(2.6) == 1);
}

TEST_CASE("bin_of agrees with a linear boundary scan") {
  std::mt19937_64 rng(321);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  std::vector<double> v(500);
  for (auto& x : v) x = dist(rng);
  const BinMapper m = construct_bins(col_of(v), 32);
  for (double x : v) CHECK(m.bin_of(x) == linear_bin(m.boundaries(), x));
  for (double b : m.boundaries()) {
    CHECK(m.bin_of(b) == linear_bin(m.boundaries(), b));
  }
}

TEST_CASE("quantize agrees across modes and books cache bytes") {
  const std::vector<double> v = {1, 2, 3, 4};
  const FeatureColumn col = col_of(v);
  const BinMapper m(0, {2.5}, false, 256);

  MemoryTracker tracker;
  const BinnedColumn cached = quantize(col, m, BinningMode::BinCache, &tracker);
  CHECK(tracker.current_footprint().bin_cache_bytes == 4);
  REQUIRE(cached.cache_data() != nullptr);
  const std::vector<std::uint8_t> expected = {0, 0, 1, 1};
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(cached.bin_at(i) == expected[i]);
  }

  const BinnedColumn lazy = quantize(col, m, BinningMode::ZeroCopy, &tracker);
  CHECK(tracker.current_footprint().bin_cache_bytes == 4);
  CHECK(lazy.cache_data() == nullptr);
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(lazy.bin_at(i) == cached.bin_at(i));
  }
}

TEST_CASE("two cached features of 1000 rows book exactly 2000 cache bytes") {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i % 97);
  const FeatureColumn col = col_of(v);
  const BinMapper m = construct_bins(col, 256);
  MemoryTracker tracker;
  const BinnedColumn a = quantize(col, m, BinningMode::BinCache, &tracker);
  const BinnedColumn b = quantize(col, m, BinningMode::BinCache, &tracker);
  CHECK(tracker.current_footprint().bin_cache_bytes == 2000);
  CHECK(tracker.peak_footprint().bin_cache_bytes == 2000);
}

TEST_CASE("cache bytes are released when binned columns go away") {
  std::vector<double> v(64, 1.0);
  v[0] = 2.0;
  const FeatureColumn col = col_of(v);
  const BinMapper m = construct_bins(col, 8);
  MemoryTracker tracker;
  {
    const BinnedColumn cached =
        quantize(col, m, BinningMode::BinCache, &tracker);
    CHECK(tracker.current_footprint().bin_cache_bytes == 64);
  }
  CHECK(tracker.current_footprint().bin_cache_bytes == 0);
  CHECK(tracker.peak_footprint().bin_cache_bytes == 64);
}

TEST_CASE("split hit counters increment and range-check") {
  const std::vector<double> v = {1, 2, 3, 4};
  BinMapper m = construct_bins(col_of(v), 4);
  CHECK(m.record_split_hit(3) == 1);
  for (int i = 1; i < 32; ++i) m.record_split_hit(3);
  CHECK(m.split_hits(3) == 32);
  CHECK_THROWS_WITH_AS(m.record_split_hit(m.n_bins()),
                       doctest::Contains("IndexOutOfRange"), Error);
}

TEST_CASE("divide inserts a boundary at the in-bin median") {
  const std::vector<double> v = {1, 2, 3, 4};
  const FeatureColumn col = col_of(v);
  BinMapper m(0, {2.5}, false, 256);
  m.record_split_hit(0);
  const std::uint64_t v0 = m.version();

  CHECK(m.adaptive_resize(0, col) == ResizeResult::Divided);
  REQUIRE(m.boundaries().size() == 2);
  CHECK(m.boundaries()[0] == 1.5);
  CHECK(m.boundaries()[1] == 2.5);
  CHECK(m.n_bins() == 3);
  CHECK(m.version() == v0 + 1);
  CHECK(m.split_hits(0) == 0);
  CHECK(m.split_hits(1) == 0);
}

TEST_CASE("divide keeps both halves non-empty when the median ties high") {
  const std::vector<double> v = {1, 2, 2, 2};
  BinMapper m(0, {}, false, 256);
  CHECK(m.adaptive_resize(0, col_of(v)) == ResizeResult::Divided);
  REQUIRE(m.boundaries().size() == 1);
  CHECK(m.boundaries()[0] == 1.5);
}

TEST_CASE("median value itself lands in the lower half after a divide") {
  const std::vector<double> v = {1, 2, 3};
  BinMapper m(0, {}, false, 256);
  CHECK(m.adaptive_resize(0, col_of(v)) == ResizeResult::Divided);
  REQUIRE(m.boundaries().size() == 1);
  CHECK(m.boundaries()[0] == 2.0);
  CHECK(m.bin_of(2.0) == 0);
  CHECK(m.bin_of(3.0) == 1);
}

TEST_CASE("shrink moves both boundaries halfway toward the median") {
  // Bin 1 spans (10, 20] and holds {11, 12, 13}; the mapper is at its cap so
  // the resize takes the shrink path.
  const std::vector<double> v = {5, 11, 12, 13, 25};
  BinMapper m(0, {10, 20}, false, 3);
  CHECK(m.adaptive_resize(1, col_of(v)) == ResizeResult::Shrunk);
  REQUIRE(m.boundaries().size() == 2);
  CHECK(m.boundaries()[0] == 11.0);
  CHECK(m.boundaries()[1] == 16.0);
}

TEST_CASE("shrinking an edge bin leaves the open side alone") {
  const std::vector<double> v = {1, 2, 3, 15, 25};
  BinMapper m(0, {10, 20}, false, 3);
  CHECK(m.adaptive_resize(0, col_of(v)) == ResizeResult::Shrunk);
  REQUIRE(m.boundaries().size() == 2);
  CHECK(m.boundaries()[0] == 6.0);
  CHECK(m.boundaries()[1] == 20.0);
}

TEST_CASE("resize of a single-valued bin is a no-op that resets the counter") {
  const std::vector<double> v = {7, 7, 7, 12};
  BinMapper m(0, {10}, false, 2);
  for (int i = 0; i < 40; ++i) m.record_split_hit(0);
  const std::uint64_t v0 = m.version();
  CHECK(m.adaptive_resize(0, col_of(v)) == ResizeResult::ResizeNoop);
  CHECK(m.split_hits(0) == 0);
  CHECK(m.version() == v0);
}

TEST_CASE("the missing bin is not a valid resize target") {
  const std::vector<double> v = {1, 2, kNaN};
  BinMapper m = construct_bins(col_of(v), 16);
  CHECK_THROWS_WITH_AS(m.adaptive_resize(m.missing_bin(), col_of(v)),
                       doctest::Contains("InvalidResizeTarget"), Error);
}

TEST_CASE("random resize sequences keep boundaries strictly increasing") {
  std::mt19937_64 rng(555);
  std::uniform_real_distribution<double> dist(-100.0, 100.0);
  std::vector<double> v(400);
  for (auto& x : v) x = dist(rng);
  const FeatureColumn col = col_of(v);
  BinMapper m = construct_bins(col, 16);

  for (int step = 0; step < 200; ++step) {
    const auto bin = static_cast<std::uint32_t>(rng() % m.n_bins());
    if (m.has_missing_bin() && bin == m.missing_bin()) continue;
    m.adaptive_resize(bin, col);
    const auto& b = m.boundaries();
    for (std::size_t i = 0; i + 1 < b.size(); ++i) REQUIRE(b[i] < b[i + 1]);
    CHECK(m.n_bins() <= m.max_bins());
    for (double x : v) CHECK(m.bin_of(x) == linear_bin(b, x));
  }
}

TEST_CASE("resize staleness is detected and cleared by requantize") {
  const std::vector<double> v = {1, 2, 3, 4};
  const FeatureColumn col = col_of(v);
  BinMapper m(0, {2.5}, false, 256);
  BinnedColumn cached = quantize(col, m, BinningMode::BinCache);
  BinnedColumn lazy = quantize(col, m, BinningMode::ZeroCopy);
  CHECK_FALSE(cached.is_stale());

  m.adaptive_resize(0, col);
  CHECK(cached.is_stale());
  CHECK(lazy.is_stale());

  cached.requantize();
  lazy.requantize();
  CHECK_FALSE(cached.is_stale());
  CHECK_FALSE(lazy.is_stale());
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(cached.bin_at(i) == m.bin_of(v[i]));
    CHECK(lazy.bin_at(i) == cached.bin_at(i));
  }
}

TEST_CASE("quantize round-trip matches bin_of for 4-byte columns too") {
  std::vector<float> f = {1.0f, 2.0f, 3.5f, kNaN, -7.25f};
  const FeatureColumn col = attach_column(f.data(), f.size(), 4);
  const BinMapper m = construct_bins(col, 256);
  const BinnedColumn cached = quantize(col, m, BinningMode::BinCache);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(cached.bin_at(i) == m.bin_of(col.raw(i)));
  }
}
