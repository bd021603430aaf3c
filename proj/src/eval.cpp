#include "histgbt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "histgbt/error.hpp"
#include "histgbt/kernels.hpp"

namespace histgbt {

double auc(const double* labels, const double* scores, std::size_t n) {
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0) {
      throw Error(ErrorCode::InvalidLabel,
                  "auc label at row " + std::to_string(i) + " is " +
                      std::to_string(labels[i]) + ", expected 0 or 1");
    }
    if (labels[i] == 1.0) ++n_pos;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw Error(ErrorCode::DegenerateLabels,
                "auc needs both classes present");
  }

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     return scores[a] < scores[b];
                   });

  // Rank-sum over the positives with average ranks inside each tie block.
  // Every term is a multiple of one half and bounded by n², so the sum stays
  // exact and equals the pairwise wins-plus-half-ties count bit for bit.
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double average_rank = static_cast<double>(i + 1 + j) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1.0) positive_rank_sum += average_rank;
    }
    i = j;
  }
  const double u =
      positive_rank_sum -
      static_cast<double>(n_pos) * static_cast<double>(n_pos + 1) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auc(const std::vector<double>& labels,
           const std::vector<double>& scores) {
  if (labels.size() != scores.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                "labels and scores differ in length");
  }
  return auc(labels.data(), scores.data(), labels.size());
}

double rmse(const double* labels, const double* predictions, std::size_t n) {
  if (n == 0) {
    throw Error(ErrorCode::EmptyDataset, "rmse needs at least one row");
  }
  return std::sqrt(kernels::squared_error_sum(predictions, labels, n) /
                   static_cast<double>(n));
}

double rmse(const std::vector<double>& labels,
            const std::vector<double>& predictions) {
  if (labels.size() != predictions.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                "labels and predictions differ in length");
  }
  return rmse(labels.data(), predictions.data(), labels.size());
}

FoldAssignment kfold_split(std::size_t n_rows, std::uint32_t k,
                           std::uint64_t seed) {
  if (k < 2 || static_cast<std::size_t>(k) > n_rows) {
    throw Error(ErrorCode::InvalidFoldCount,
                "fold count must satisfy 2 <= k <= n_rows, got k=" +
                    std::to_string(k) + " for " + std::to_string(n_rows) +
                    " rows");
  }
  std::vector<std::uint32_t> perm(n_rows);
  std::iota(perm.begin(), perm.end(), 0u);
  // Hand-rolled Fisher-Yates with a modulo draw: std::shuffle and the
  // distribution classes vary across standard libraries, and assignments
  // must reproduce from the seed alone.
  std::mt19937_64 rng(seed);
  for (std::size_t i = n_rows - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(perm[i], perm[j]);
  }

  FoldAssignment assignment;
  assignment.n_rows = n_rows;
  assignment.k = k;
  assignment.fold_of.resize(n_rows);
  const std::size_t base = n_rows / k;
  const std::size_t extra = n_rows % k;
  std::size_t pos = 0;
  for (std::uint32_t fold = 0; fold < k; ++fold) {
    const std::size_t size = base + (fold < extra ? 1 : 0);
    for (std::size_t t = pos; t < pos + size; ++t) {
      assignment.fold_of[perm[t]] = fold;
    }
    pos += size;
  }
  return assignment;
}

}  // namespace histgbt
