#include "botflow/models/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "botflow/metrics.hpp"

namespace botflow::models {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

Dataset dataset_view(const FeatureMatrix& m) {
  return Dataset{m.values().data(), m.labels().data(), m.rows(), m.cols()};
}

void check_trainable(const FeatureMatrix& m) {
  if (m.rows() == 0) throw std::invalid_argument("train: empty feature matrix");
  m.validate_finite();
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json params_to_json(const HyperParams& p) {
  return json{
      {"family", std::string(model_family_name(p.family))},
      {"l1_strength", p.l1_strength},
      {"n_trees", p.n_trees},
      {"features_per_split", p.features_per_split == FeatureRule::sqrt_rule ? "sqrt" : "all"},
      {"n_estimators", p.n_estimators},
      {"learning_rate", p.learning_rate},
      {"max_depth", p.max_depth},
      {"class_weighted", p.class_weighted},
      {"seed", p.seed},
  };
}

HyperParams params_from_json(const json& j) {
  HyperParams p;
  auto family = parse_model_family(j.at("family").get<std::string>());
  if (!family) throw std::runtime_error("model document: unknown family");
  p.family = *family;
  p.l1_strength = j.at("l1_strength").get<double>();
  p.n_trees = j.at("n_trees").get<int>();
  p.features_per_split = j.at("features_per_split").get<std::string>() == "sqrt"
                             ? FeatureRule::sqrt_rule
                             : FeatureRule::all;
  p.n_estimators = j.at("n_estimators").get<int>();
  p.learning_rate = j.at("learning_rate").get<double>();
  p.max_depth = j.at("max_depth").get<int>();
  p.class_weighted = j.at("class_weighted").get<bool>();
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

json tree_to_json(const Tree& tree) {
  json f = json::array(), t = json::array(), l = json::array(), r = json::array(),
       v = json::array();
  for (const TreeNode& node : tree.nodes) {
    f.push_back(node.feature);
    t.push_back(node.threshold);
    l.push_back(node.left);
    r.push_back(node.right);
    v.push_back(node.value);
  }
  return json{{"feature", f}, {"threshold", t}, {"left", l}, {"right", r}, {"value", v}};
}

Tree tree_from_json(const json& j) {
  Tree tree;
  const auto& f = j.at("feature");
  const auto& t = j.at("threshold");
  const auto& l = j.at("left");
  const auto& r = j.at("right");
  const auto& v = j.at("value");
  if (f.size() != t.size() || f.size() != l.size() || f.size() != r.size() ||
      f.size() != v.size())
    throw std::runtime_error("model document: ragged tree arrays");
  for (std::size_t i = 0; i < f.size(); ++i)
    tree.nodes.push_back({f[i].get<std::int32_t>(), t[i].get<double>(),
                          l[i].get<std::int32_t>(), r[i].get<std::int32_t>(),
                          v[i].get<double>()});
  if (tree.nodes.empty()) throw std::runtime_error("model document: empty tree");
  return tree;
}

json trees_to_json(const std::vector<Tree>& trees) {
  json out = json::array();
  for (const Tree& t : trees) out.push_back(tree_to_json(t));
  return out;
}

std::vector<Tree> trees_from_json(const json& j) {
  std::vector<Tree> out;
  for (const auto& t : j) out.push_back(tree_from_json(t));
  return out;
}

}  // namespace

Model train(const FeatureMatrix& matrix, const HyperParams& params) {
  params.validate();
  check_trainable(matrix);
  Dataset data = dataset_view(matrix);

  Model model;
  model.params = params;
  model.schema = matrix.schema().names();
  model.fingerprint = matrix.schema().fingerprint();
  switch (params.family) {
    case ModelFamily::logreg:
      model.impl = train_logreg(data, params);
      break;
    case ModelFamily::random_forest:
      model.impl = train_random_forest(data, params);
      break;
    case ModelFamily::gradient_boosting:
      model.impl = train_gradient_boosting(data, params);
      break;
  }
  return model;
}

std::vector<double> predict_proba(const Model& model, const FeatureMatrix& matrix) {
  auto names = matrix.schema().names();
  if (model.fingerprint != matrix.schema().fingerprint() || names != model.schema) {
    for (std::size_t i = 0; i < std::min(names.size(), model.schema.size()); ++i)
      if (names[i] != model.schema[i])
        throw std::runtime_error("schema mismatch at column " + std::to_string(i) +
                                 ": model has '" + model.schema[i] +
                                 "', matrix has '" + names[i] + "'");
    throw std::runtime_error("schema mismatch: model has " +
                             std::to_string(model.schema.size()) + " columns, matrix has " +
                             std::to_string(names.size()));
  }
  matrix.validate_finite();

  const double* x = matrix.values().data();
  std::size_t n = matrix.rows(), d = matrix.cols();
  if (const auto* lr = std::get_if<LogRegModel>(&model.impl))
    return predict_logreg(*lr, x, n, d);
  if (const auto* rf = std::get_if<ForestModel>(&model.impl))
    return predict_forest(*rf, x, n, d);
  return predict_boosting(std::get<BoostModel>(model.impl), x, n, d);
}

std::vector<std::pair<std::string, double>> feature_importance(const Model& model) {
  std::vector<double> raw;
  if (const auto* lr = std::get_if<LogRegModel>(&model.impl)) {
    raw.reserve(lr->weights.size());
    for (double w : lr->weights) raw.push_back(std::fabs(w));
  } else if (const auto* rf = std::get_if<ForestModel>(&model.impl)) {
    raw = rf->importance_raw;
  } else {
    raw = std::get<BoostModel>(model.impl).importance_raw;
  }

  double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  if (total > 0)
    for (double& v : raw) v /= total;

  std::vector<std::size_t> order(raw.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return raw[a] > raw[b]; });

  std::vector<std::pair<std::string, double>> out;
  out.reserve(raw.size());
  for (std::size_t i : order) out.emplace_back(model.schema[i], raw[i]);
  return out;
}

std::string serialize(const Model& model) {
  json body;
  body["family"] = std::string(model_family_name(model.params.family));
  body["params"] = params_to_json(model.params);
  body["schema"] = model.schema;
  body["fingerprint"] = model.fingerprint;
  if (const auto* lr = std::get_if<LogRegModel>(&model.impl)) {
    body["logreg"] = json{{"weights", lr->weights},
                          {"bias", lr->bias},
                          {"mean", lr->mean},
                          {"stdev", lr->stdev}};
  } else if (const auto* rf = std::get_if<ForestModel>(&model.impl)) {
    body["forest"] = json{{"trees", trees_to_json(rf->trees)},
                          {"importance", rf->importance_raw}};
  } else {
    const auto& gb = std::get<BoostModel>(model.impl);
    body["boosting"] = json{{"base_score", gb.base_score},
                            {"trees", trees_to_json(gb.trees)},
                            {"importance", gb.importance_raw}};
  }

  json doc;
  doc["format"] = "botflow-model";
  doc["version"] = kFormatVersion;
  doc["checksum"] = fnv1a_hex(body.dump());
  doc["model"] = std::move(body);
  return doc.dump(1);
}

Model deserialize(const std::string& bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("model document: parse failure: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "botflow-model")
      throw std::runtime_error("model document: unknown format");
    if (doc.at("version").get<int>() != kFormatVersion)
      throw std::runtime_error("model document: unsupported version");
    const json& body = doc.at("model");
    if (fnv1a_hex(body.dump()) != doc.at("checksum").get<std::string>())
      throw std::runtime_error("model document: checksum mismatch (corrupt file)");

    Model model;
    model.params = params_from_json(body.at("params"));
    model.schema = body.at("schema").get<std::vector<std::string>>();
    model.fingerprint = body.at("fingerprint").get<std::string>();
    switch (model.params.family) {
      case ModelFamily::logreg: {
        const json& j = body.at("logreg");
        LogRegModel lr;
        lr.weights = j.at("weights").get<std::vector<double>>();
        lr.bias = j.at("bias").get<double>();
        lr.mean = j.at("mean").get<std::vector<double>>();
        lr.stdev = j.at("stdev").get<std::vector<double>>();
        model.impl = std::move(lr);
        break;
      }
      case ModelFamily::random_forest: {
        const json& j = body.at("forest");
        ForestModel rf;
        rf.trees = trees_from_json(j.at("trees"));
        rf.importance_raw = j.at("importance").get<std::vector<double>>();
        model.impl = std::move(rf);
        break;
      }
      case ModelFamily::gradient_boosting: {
        const json& j = body.at("boosting");
        BoostModel gb;
        gb.base_score = j.at("base_score").get<double>();
        gb.trees = trees_from_json(j.at("trees"));
        gb.importance_raw = j.at("importance").get<std::vector<double>>();
        model.impl = std::move(gb);
        break;
      }
    }
    return model;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("model document: malformed: ") + e.what());
  }
}

namespace {

/// Size key for tie-breaks: fewer trees, then shallower, then stronger L1.
std::tuple<int, int, double> model_size_key(const HyperParams& p) {
  int trees = 0;
  switch (p.family) {
    case ModelFamily::logreg: trees = 0; break;
    case ModelFamily::random_forest: trees = p.n_trees; break;
    case ModelFamily::gradient_boosting: trees = p.n_estimators; break;
  }
  int depth = p.family == ModelFamily::logreg ? 0 : p.max_depth;
  return {trees, depth, -p.l1_strength};
}

}  // namespace

GridResult grid_search(const FeatureMatrix& matrix, ModelFamily family,
                       const std::vector<HyperParams>& grid, int k,
                       std::uint64_t seed) {
  if (grid.empty()) throw std::invalid_argument("grid_search: empty grid");
  if (k < 2) throw std::invalid_argument("grid_search: k must be >= 2");
  for (const auto& cell : grid) {
    if (cell.family != family)
      throw std::invalid_argument("grid_search: grid cell family differs from requested family");
    cell.validate();
  }
  check_trainable(matrix);

  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < matrix.rows(); ++i)
    (matrix.labels()[i] ? pos : neg).push_back(i);
  if (static_cast<int>(pos.size()) < k || static_cast<int>(neg.size()) < k)
    throw std::runtime_error(
        "grid_search: stratified folds would leave a fold without both classes; "
        "use k <= " + std::to_string(std::min(pos.size(), neg.size())));

  auto shuffle = [](std::vector<std::size_t>& v, Rng rng) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[rng.below(i)]);
  };
  shuffle(pos, Rng(Rng::derive(seed, 101)));
  shuffle(neg, Rng(Rng::derive(seed, 202)));

  std::vector<int> fold(matrix.rows());
  for (std::size_t i = 0; i < pos.size(); ++i) fold[pos[i]] = static_cast<int>(i % k);
  for (std::size_t i = 0; i < neg.size(); ++i) fold[neg[i]] = static_cast<int>(i % k);

  GridResult result;
  result.cell_mean_f1.assign(grid.size(), 0.0);

  for (int f = 0; f < k; ++f) {
    FeatureMatrix train_m(matrix.schema()), test_m(matrix.schema());
    for (std::size_t i = 0; i < matrix.rows(); ++i)
      (fold[i] == f ? test_m : train_m)
          .add_row(matrix.keys()[i], matrix.row(i), matrix.labels()[i]);
    for (std::size_t c = 0; c < grid.size(); ++c) {
      Model model = train(train_m, grid[c]);
      auto scores = predict_proba(model, test_m);
      auto m = classification_metrics(test_m.labels(), scores, 0.5);
      result.cell_mean_f1[c] += m.f1 / static_cast<double>(k);
    }
  }

  std::size_t best = 0;
  for (std::size_t c = 1; c < grid.size(); ++c) {
    if (result.cell_mean_f1[c] > result.cell_mean_f1[best] ||
        (result.cell_mean_f1[c] == result.cell_mean_f1[best] &&
         model_size_key(grid[c]) < model_size_key(grid[best])))
      best = c;
  }
  result.best = grid[best];
  return result;
}

}  // namespace botflow::models
