#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "tabpfgen/dataset.hpp"
#include "tabpfgen/error.hpp"

namespace tabpfgen {

// Binary AUC as the Mann-Whitney U statistic over n_pos * n_neg, ties worth
// one half. The rank sum is kept in integer half-units so the result equals
// exhaustive pair counting bit-for-bit.
inline double binary_auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& positive) {
  require(scores.size() == positive.size(), ErrorCode::bad_argument, "auc: size mismatch");
  const std::size_t n = scores.size();
  std::int64_t n_pos = 0;
  for (auto p : positive) n_pos += p ? 1 : 0;
  const std::int64_t n_neg = static_cast<std::int64_t>(n) - n_pos;
  require(n_pos > 0 && n_neg > 0, ErrorCode::single_class_labels,
          "auc: needs at least one positive and one negative");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  std::int64_t two_rank_sum_pos = 0;  // sum over positives of 2 * midrank
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // 1-based ranks i+1 .. j share midrank (i+1+j)/2.
    const std::int64_t two_midrank = static_cast<std::int64_t>(i) + 1 + static_cast<std::int64_t>(j);
    for (std::size_t t = i; t < j; ++t)
      if (positive[order[t]]) two_rank_sum_pos += two_midrank;
    i = j;
  }
  const std::int64_t two_u = two_rank_sum_pos - n_pos * (n_pos + 1);
  return static_cast<double>(two_u) / static_cast<double>(2 * n_pos * n_neg);
}

inline double binary_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::vector<std::uint8_t> positive(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] == 0 || labels[i] == 1, ErrorCode::bad_argument,
            "auc: binary labels must be 0/1");
    positive[i] = labels[i] == 1 ? 1 : 0;
  }
  return binary_auc(scores, positive);
}

// Macro one-vs-rest AUC: the unweighted mean over classes (those present in
// `labels`) of the binary AUC of score column k against `label == k`.
inline double macro_ovr_auc(const Matrix& scores, const std::vector<int>& labels) {
  require(static_cast<std::size_t>(scores.rows()) == labels.size(), ErrorCode::bad_argument,
          "auc: score rows must match label count");
  const auto n = labels.size();
  const auto k_count = scores.cols();
  double total = 0.0;
  int evaluated = 0;
  std::vector<double> col(n);
  std::vector<std::uint8_t> positive(n);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    std::int64_t n_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      positive[i] = labels[i] == static_cast<int>(k) ? 1 : 0;
      n_pos += positive[i];
      col[i] = scores(static_cast<Eigen::Index>(i), k);
    }
    if (n_pos == 0 || n_pos == static_cast<std::int64_t>(n)) continue;
    total += binary_auc(col, positive);
    ++evaluated;
  }
  require(evaluated > 0, ErrorCode::single_class_labels, "auc: labels contain a single class");
  return total / evaluated;
}

// Convenience overload picking binary vs macro by score shape.
inline double auc(const Matrix& scores, const std::vector<int>& labels) {
  if (scores.cols() == 1) {
    std::vector<double> s(scores.data(), scores.data() + scores.rows());
    return binary_auc(s, labels);
  }
  return macro_ovr_auc(scores, labels);
}

}  // namespace tabpfgen
