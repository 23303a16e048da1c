#pragma once

#include <cstddef>
#include <vector>

#include "botflow/models/common.hpp"
#include "botflow/models/tree.hpp"

namespace botflow::models {

struct BoostModel {
  /// Log-odds of the training prior.
  double base_score = 0.0;
  /// Regression trees in training order; leaf values already carry the
  /// learning-rate shrinkage.
  std::vector<Tree> trees;
  std::vector<double> importance_raw;
};

/// Logistic-loss boosting: each round fits a depth-limited regression
/// tree to the negative gradient (y - p) and sets leaf values by a
/// shrunken Newton step.
BoostModel train_gradient_boosting(const Dataset& data,
                                   const HyperParams& params);

/// sigmoid(base + sum of leaf values), accumulated in training order.
std::vector<double> predict_boosting(const BoostModel& model, const double* x,
                                     std::size_t n, std::size_t d);

}  // namespace botflow::models
