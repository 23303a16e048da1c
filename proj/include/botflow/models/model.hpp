#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "botflow/feature_matrix.hpp"
#include "botflow/models/common.hpp"
#include "botflow/models/gradient_boosting.hpp"
#include "botflow/models/logreg.hpp"
#include "botflow/models/random_forest.hpp"

namespace botflow::models {

/// A trained classifier of any family, pinned to the column schema it
/// was trained on.
struct Model {
  HyperParams params;
  std::vector<std::string> schema;
  std::string fingerprint;
  std::variant<LogRegModel, ForestModel, BoostModel> impl;
};

/// Deterministic given (X, params). Rejects empty or non-finite input;
/// logreg additionally requires both classes.
Model train(const FeatureMatrix& matrix, const HyperParams& params);

/// Scores in [0, 1]. Throws on schema mismatch, naming the first
/// differing column.
std::vector<double> predict_proba(const Model& model, const FeatureMatrix& matrix);

/// (feature, importance) descending; ties keep schema order. Ensemble
/// importances are normalized impurity decreases summing to 1; logreg
/// falls back to normalized |weight| (a rough proxy, not an impurity
/// measure).
std::vector<std::pair<std::string, double>> feature_importance(const Model& model);

/// Versioned JSON document with an integrity checksum; byte-stable for
/// identical models.
std::string serialize(const Model& model);
Model deserialize(const std::string& bytes);

struct GridResult {
  HyperParams best;
  std::vector<double> cell_mean_f1;  // one per grid cell, in grid order
};

/// Stratified k-fold mean F1 at threshold 0.5 over every cell; ties
/// prefer the smaller model (fewer trees, then shallower, then stronger
/// L1).
GridResult grid_search(const FeatureMatrix& matrix, ModelFamily family,
                       const std::vector<HyperParams>& grid, int k,
                       std::uint64_t seed);

}  // namespace botflow::models
