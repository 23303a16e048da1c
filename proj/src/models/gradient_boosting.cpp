#include "botflow/models/gradient_boosting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "botflow/models/logreg.hpp"

namespace botflow::models {

BoostModel train_gradient_boosting(const Dataset& data, const HyperParams& params) {
  params.validate();
  if (data.n == 0) throw std::invalid_argument("boosting: empty training data");
  const std::size_t n = data.n;

  std::size_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) pos += data.y[i];
  std::vector<double> weight(n, 1.0);
  if (params.class_weighted && pos > 0 && pos < n) {
    double wp = static_cast<double>(n) / (2.0 * static_cast<double>(pos));
    double wn = static_cast<double>(n) / (2.0 * static_cast<double>(n - pos));
    for (std::size_t i = 0; i < n; ++i) weight[i] = data.y[i] ? wp : wn;
  }

  double prior = std::clamp(static_cast<double>(pos) / static_cast<double>(n),
                            1e-12, 1.0 - 1e-12);

  BoostModel model;
  model.base_score = std::log(prior / (1.0 - prior));
  model.trees.reserve(params.n_estimators);
  model.importance_raw.assign(data.d, 0.0);

  Presorted presorted(data);
  RegTreeParams tree_params;
  tree_params.max_depth = params.max_depth;

  std::vector<double> score(n, model.base_score);
  std::vector<double> grad(n), hess(n);
  std::vector<std::int32_t> leaf_of(n);

  for (int m = 0; m < params.n_estimators; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      double p = sigmoid(score[i]);
      grad[i] = static_cast<double>(data.y[i]) - p;  // negative gradient
      hess[i] = p * (1.0 - p);
    }
    Tree tree = build_regression_tree(data, presorted, grad, hess, weight,
                                      tree_params, &model.importance_raw, &leaf_of);
    // bake the shrinkage into the leaves
    for (TreeNode& node : tree.nodes)
      if (node.feature < 0) node.value *= params.learning_rate;
    for (std::size_t i = 0; i < n; ++i) score[i] += tree.nodes[leaf_of[i]].value;
    model.trees.push_back(std::move(tree));
  }
  return model;
}

std::vector<double> predict_boosting(const BoostModel& model, const double* x,
                                     std::size_t n, std::size_t d) {
  std::vector<double> out(n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(n); ++i) {
    double score = model.base_score;
    for (const Tree& tree : model.trees) score += tree.predict({x + i * d, d});
    out[i] = sigmoid(score);
  }
  return out;
}

}  // namespace botflow::models
