#pragma once

#include <cstddef>
#include <vector>

#include "botflow/models/common.hpp"
#include "botflow/models/tree.hpp"

namespace botflow::models {

struct ForestModel {
  std::vector<Tree> trees;
  /// Mean weighted impurity decrease per feature (unnormalized).
  std::vector<double> importance_raw;
};

/// Bagged Gini CART trees. Each tree draws its bootstrap sample and
/// feature subsets from a substream derived from (seed, tree index), so
/// trees can train in parallel and the result is thread-count
/// independent.
ForestModel train_random_forest(const Dataset& data, const HyperParams& params);

/// Mean leaf probability over trees.
std::vector<double> predict_forest(const ForestModel& model, const double* x,
                                   std::size_t n, std::size_t d);

}  // namespace botflow::models
