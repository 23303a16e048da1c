#include "botflow/models/common.hpp"

#include <stdexcept>

namespace botflow::models {

std::optional<ModelFamily> parse_model_family(std::string_view text) {
  if (text == "logreg" || text == "logistic_regression") return ModelFamily::logreg;
  if (text == "random_forest") return ModelFamily::random_forest;
  if (text == "gradient_boosting") return ModelFamily::gradient_boosting;
  return std::nullopt;
}

std::string_view model_family_name(ModelFamily family) {
  switch (family) {
    case ModelFamily::logreg: return "logreg";
    case ModelFamily::random_forest: return "random_forest";
    case ModelFamily::gradient_boosting: return "gradient_boosting";
  }
  return "";
}

HyperParams HyperParams::logreg(double l1, std::uint64_t seed) {
  HyperParams p;
  p.family = ModelFamily::logreg;
  p.l1_strength = l1;
  p.seed = seed;
  return p;
}

HyperParams HyperParams::random_forest(int trees, int depth, std::uint64_t seed) {
  HyperParams p;
  p.family = ModelFamily::random_forest;
  p.n_trees = trees;
  p.max_depth = depth;
  p.seed = seed;
  return p;
}

HyperParams HyperParams::gradient_boosting(int estimators, int depth, double lr,
                                           std::uint64_t seed) {
  HyperParams p;
  p.family = ModelFamily::gradient_boosting;
  p.n_estimators = estimators;
  p.max_depth = depth;
  p.learning_rate = lr;
  p.seed = seed;
  return p;
}

void HyperParams::validate() const {
  switch (family) {
    case ModelFamily::logreg:
      if (!(l1_strength > 0))
        throw std::invalid_argument("logreg: l1_strength must be > 0");
      break;
    case ModelFamily::random_forest:
      if (n_trees < 1) throw std::invalid_argument("forest: n_trees must be >= 1");
      if (max_depth < 1) throw std::invalid_argument("forest: max_depth must be >= 1");
      break;
    case ModelFamily::gradient_boosting:
      if (n_estimators < 1)
        throw std::invalid_argument("boosting: n_estimators must be >= 1");
      if (max_depth < 1) throw std::invalid_argument("boosting: max_depth must be >= 1");
      if (!(learning_rate > 0.0 && learning_rate <= 1.0))
        throw std::invalid_argument("boosting: learning_rate must be in (0, 1]");
      break;
  }
}

}  // namespace botflow::models
