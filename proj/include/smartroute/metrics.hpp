#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "smartroute/core.hpp"
#include "smartroute/errors.hpp"

namespace smartroute {

inline double precision(const MetricsCounts& c) {
  if (c.tp + c.fp == 0) throw UndefinedMetricError("precision undefined: no predicted positives");
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

// ROC-AUC via the rank-sum identity: equals P(score_pos > score_neg) plus
// half the tie probability over all positive/negative pairs.
inline double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("scores/labels length mismatch");
  std::size_t n = scores.size();
  std::size_t pos = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw ValidationError("labels must be binary");
    pos += static_cast<std::size_t>(l);
  }
  std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) {
    throw UndefinedMetricError("roc_auc undefined for single-class labels");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // ranks i+1..j share the midrank
    double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) rank_sum_pos += midrank;
    }
    i = j;
  }
  double auc = (rank_sum_pos - static_cast<double>(pos) * (static_cast<double>(pos) + 1.0) / 2.0) /
               (static_cast<double>(pos) * static_cast<double>(neg));
  return auc;
}

// Counts at a probability threshold; predicted positive iff score > threshold.
inline MetricsCounts confusion_counts(std::span<const double> scores, std::span<const int> labels,
                                      double threshold = 0.5) {
  if (scores.size() != labels.size()) throw ValidationError("scores/labels length mismatch");
  MetricsCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    bool predicted = scores[i] > threshold;
    if (predicted && labels[i] == 1) ++c.tp;
    else if (predicted && labels[i] == 0) ++c.fp;
    else if (!predicted && labels[i] == 0) ++c.tn;
    else ++c.fn;
  }
  return c;
}

}  // namespace smartroute
