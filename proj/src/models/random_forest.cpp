#include "botflow/models/random_forest.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace botflow::models {

namespace {

int resolve_features_per_split(FeatureRule rule, std::size_t d) {
  switch (rule) {
    case FeatureRule::sqrt_rule:
      return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
    case FeatureRule::all:
      return static_cast<int>(d);
  }
  return static_cast<int>(d);
}

}  // namespace

ForestModel train_random_forest(const Dataset& data, const HyperParams& params) {
  params.validate();
  if (data.n == 0) throw std::invalid_argument("forest: empty training data");

  std::size_t pos = 0;
  for (std::size_t i = 0; i < data.n; ++i) pos += data.y[i];
  std::array<double, 2> class_weight{1.0, 1.0};
  if (params.class_weighted && pos > 0 && pos < data.n) {
    class_weight[1] = static_cast<double>(data.n) / (2.0 * static_cast<double>(pos));
    class_weight[0] = static_cast<double>(data.n) / (2.0 * static_cast<double>(data.n - pos));
  }

  CartParams cart;
  cart.max_depth = params.max_depth;
  cart.features_per_split = resolve_features_per_split(params.features_per_split, data.d);

  ForestModel model;
  model.trees.resize(params.n_trees);
  std::vector<std::vector<double>> per_tree_importance(
      params.n_trees, std::vector<double>(data.d, 0.0));

#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < params.n_trees; ++t) {
    Rng rng(Rng::derive(params.seed, static_cast<std::uint64_t>(t)));
    std::vector<std::uint32_t> sample(data.n);
    for (auto& s : sample) s = static_cast<std::uint32_t>(rng.below(data.n));
    model.trees[t] = build_cart_tree(data, sample, class_weight, cart, rng,
                                     &per_tree_importance[t]);
  }

  model.importance_raw.assign(data.d, 0.0);
  for (const auto& imp : per_tree_importance)
    for (std::size_t j = 0; j < data.d; ++j) model.importance_raw[j] += imp[j];
  for (auto& v : model.importance_raw) v /= static_cast<double>(params.n_trees);
  return model;
}

std::vector<double> predict_forest(const ForestModel& model, const double* x,
                                   std::size_t n, std::size_t d) {
  std::vector<double> out(n, 0.0);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(n); ++i) {
    double sum = 0.0;
    for (const Tree& tree : model.trees) sum += tree.predict({x + i * d, d});
    out[i] = sum / static_cast<double>(model.trees.size());
  }
  return out;
}

}  // namespace botflow::models
