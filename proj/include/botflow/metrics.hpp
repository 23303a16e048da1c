#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace botflow {

struct ConfusionMetrics {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

/// Thresholded counts and P/R/F1. Predicted positive iff score >=
/// threshold. Conventions: precision is 0 when nothing is predicted
/// positive, F1 is 0 when P+R is 0.
ConfusionMetrics classification_metrics(std::span<const int> labels,
                                        std::span<const double> scores,
                                        double threshold);

/// Mann-Whitney statistic: P(score_pos > score_neg) + 0.5 P(tie).
/// Throws for single-class input.
double roc_auc(std::span<const int> labels, std::span<const double> scores);

struct PrPoint {
  double threshold = 0.0;
  double recall = 0.0;
  double precision = 0.0;
};

struct PrCurve {
  /// One point per distinct score plus the (0, 1) start point; recall is
  /// non-decreasing along the list.
  std::vector<PrPoint> points;
  /// Trapezoid over recall.
  double pr_auc = 0.0;
};

PrCurve pr_curve(std::span<const int> labels, std::span<const double> scores);

}  // namespace botflow
