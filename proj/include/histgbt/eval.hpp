#pragma once

#include <cstdint>
#include <vector>

// Ranking and regression metrics plus the seeded fold assignment used by
// cross-validation.

namespace histgbt {

// Probability that a uniformly random positive outranks a random negative,
// ties counted one half; computed by sort and rank-sum with average ranks on
// ties, which matches the quadratic pairwise count exactly. Labels must be
// 0/1 with both classes present (DegenerateLabels otherwise).
double auc(const double* labels, const double* scores, std::size_t n);
double auc(const std::vector<double>& labels,
           const std::vector<double>& scores);

// sqrt(mean((y - prediction)^2)); EmptyDataset on zero rows.
double rmse(const double* labels, const double* predictions, std::size_t n);
double rmse(const std::vector<double>& labels,
            const std::vector<double>& predictions);

struct FoldAssignment {
  std::size_t n_rows = 0;
  std::uint32_t k = 0;
  // Fold id in [0, k) per row; fold sizes differ by at most one.
  std::vector<std::uint32_t> fold_of;
};

// Seeded uniform shuffle followed by contiguous blocks, the first
// n_rows % k folds holding one extra row. Deterministic per (n, k, seed)
// across platforms. Requires 2 <= k <= n_rows (InvalidFoldCount).
FoldAssignment kfold_split(std::size_t n_rows, std::uint32_t k,
                           std::uint64_t seed);

}  // namespace histgbt
