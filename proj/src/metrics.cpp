#include "botflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace botflow {

namespace {

void validate_inputs(std::span<const int> labels, std::span<const double> scores) {
  if (labels.empty()) throw std::invalid_argument("metrics: empty input");
  if (labels.size() != scores.size())
    throw std::invalid_argument("metrics: labels and scores differ in length");
  for (int l : labels)
    if (l != 0 && l != 1) throw std::invalid_argument("metrics: labels must be 0/1");
  for (double s : scores)
    if (!(s >= 0.0 && s <= 1.0))
      throw std::invalid_argument("metrics: scores must lie in [0, 1]");
}

std::pair<std::int64_t, std::int64_t> class_counts(std::span<const int> labels) {
  std::int64_t pos = 0;
  for (int l : labels) pos += l;
  return {pos, static_cast<std::int64_t>(labels.size()) - pos};
}

}  // namespace

ConfusionMetrics classification_metrics(std::span<const int> labels,
                                        std::span<const double> scores,
                                        double threshold) {
  validate_inputs(labels, scores);
  ConfusionMetrics m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    bool pred = scores[i] >= threshold;
    if (pred && labels[i] == 1) ++m.tp;
    else if (pred && labels[i] == 0) ++m.fp;
    else if (!pred && labels[i] == 0) ++m.tn;
    else ++m.fn;
  }
  m.precision = m.tp + m.fp > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
  m.recall = m.tp + m.fn > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
  m.f1 = m.precision + m.recall > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

double roc_auc(std::span<const int> labels, std::span<const double> scores) {
  validate_inputs(labels, scores);
  auto [pos, neg] = class_counts(labels);
  if (pos == 0 || neg == 0)
    throw std::domain_error("AUC undefined for single-class input");

  std::vector<std::size_t> idx(labels.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // ascending scan; ties handled per equal-score run
  double wins = 0.0, tie_credit = 0.0;
  std::int64_t neg_below = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    std::int64_t run_pos = 0, run_neg = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      labels[idx[j]] == 1 ? ++run_pos : ++run_neg;
      ++j;
    }
    wins += static_cast<double>(run_pos) * static_cast<double>(neg_below);
    tie_credit += 0.5 * static_cast<double>(run_pos) * static_cast<double>(run_neg);
    neg_below += run_neg;
    i = j;
  }
  return (wins + tie_credit) / (static_cast<double>(pos) * static_cast<double>(neg));
}

PrCurve pr_curve(std::span<const int> labels, std::span<const double> scores) {
  validate_inputs(labels, scores);
  auto [pos, neg] = class_counts(labels);
  if (pos == 0 || neg == 0)
    throw std::domain_error("PR curve undefined for single-class input");

  std::vector<std::size_t> idx(labels.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  PrCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});

  std::int64_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    double s = scores[idx[i]];
    while (i < idx.size() && scores[idx[i]] == s) {
      labels[idx[i]] == 1 ? ++tp : ++fp;
      ++i;
    }
    double recall = static_cast<double>(tp) / static_cast<double>(pos);
    double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    curve.points.push_back({s, recall, precision});
  }

  double auc = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto& a = curve.points[k - 1];
    const auto& b = curve.points[k];
    auc += (b.recall - a.recall) * 0.5 * (a.precision + b.precision);
  }
  curve.pr_auc = auc;
  return curve;
}

}  // namespace botflow
