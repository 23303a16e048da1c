#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "botflow/metrics.hpp"
#include "botflow/models/model.hpp"

using namespace botflow;
using namespace botflow::models;

namespace {

FeatureMatrix make_matrix(const std::vector<std::vector<double>>& rows,
                          const std::vector<int>& labels) {
  FeatureSchema schema;
  for (std::size_t j = 0; j < rows.at(0).size(); ++j)
    schema.columns.push_back({"f" + std::to_string(j), ""});
  FeatureMatrix m(schema);
  for (std::size_t i = 0; i < rows.size(); ++i)
    m.add_row(RowKey{"s", {}, static_cast<std::int64_t>(i)}, rows[i], labels[i]);
  return m;
}

FeatureMatrix random_matrix(Rng& rng, std::size_t n, std::size_t d,
                            double pos_rate = 0.4) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(d);
    int label = rng.uniform() < pos_rate;
    for (std::size_t j = 0; j < d; ++j)
      row[j] = rng.normal(label ? 0.8 : -0.8, 2.0);
    rows.push_back(row);
    labels.push_back(label);
  }
  labels[0] = 1;
  labels[1] = 0;
  return make_matrix(rows, labels);
}

double training_f1(const Model& model, const FeatureMatrix& m) {
  auto scores = predict_proba(model, m);
  return classification_metrics(m.labels(), scores, 0.5).f1;
}

// ---- naive reference boosting loop (exhaustive split search) ----

struct NaiveTree {
  int feature = -1;
  double threshold = 0;
  double value = 0;
  std::unique_ptr<NaiveTree> left, right;

  double predict(const std::vector<double>& x) const {
    if (feature < 0) return value;
    return x[feature] <= threshold ? left->predict(x) : right->predict(x);
  }
};

std::unique_ptr<NaiveTree> naive_fit(const std::vector<std::vector<double>>& x,
                                     const std::vector<double>& grad,
                                     const std::vector<double>& hess,
                                     const std::vector<std::size_t>& idx,
                                     int depth) {
  auto node = std::make_unique<NaiveTree>();
  double g = 0, h = 0, g2 = 0;
  for (auto i : idx) {
    g += grad[i];
    h += hess[i];
    g2 += grad[i] * grad[i];
  }
  node->value = g / std::max(h, 1e-12);

  // stop on pure nodes only; impure nodes split at the best gain even
  // when it is zero
  double impurity = g2 - g * g / static_cast<double>(idx.size());
  if (depth == 0 || idx.size() < 2 || impurity <= 1e-12) return node;

  double base = g * g / static_cast<double>(idx.size());
  double best_gain = -1.0;
  int best_f = -1;
  double best_thr = 0;
  for (std::size_t f = 0; f < x[0].size(); ++f) {
    std::vector<double> values;
    for (auto i : idx) values.push_back(x[i][f]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t k = 1; k < values.size(); ++k) {
      double thr = values[k - 1] + 0.5 * (values[k] - values[k - 1]);
      double gl = 0, gr = 0;
      std::size_t nl = 0, nr = 0;
      for (auto i : idx)
        if (x[i][f] <= thr) {
          gl += grad[i];
          ++nl;
        } else {
          gr += grad[i];
          ++nr;
        }
      if (nl == 0 || nr == 0) continue;
      double gain = gl * gl / nl + gr * gr / nr - base;
      if (gain > best_gain) {
        best_gain = gain;
        best_f = static_cast<int>(f);
        best_thr = thr;
      }
    }
  }
  if (best_f < 0) return node;

  std::vector<std::size_t> li, ri;
  for (auto i : idx)
    (x[i][best_f] <= best_thr ? li : ri).push_back(i);
  node->feature = best_f;
  node->threshold = best_thr;
  node->left = naive_fit(x, grad, hess, li, depth - 1);
  node->right = naive_fit(x, grad, hess, ri, depth - 1);
  return node;
}

double naive_boost_f1(const std::vector<std::vector<double>>& x,
                      const std::vector<int>& y, int rounds, int depth, double lr) {
  double pos = 0;
  for (int v : y) pos += v;
  double prior = std::clamp(pos / y.size(), 1e-12, 1.0 - 1e-12);
  std::vector<double> score(y.size(), std::log(prior / (1 - prior)));

  std::vector<std::size_t> idx(y.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;

  for (int m = 0; m < rounds; ++m) {
    std::vector<double> grad(y.size()), hess(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      double p = sigmoid(score[i]);
      grad[i] = y[i] - p;
      hess[i] = p * (1 - p);
    }
    auto tree = naive_fit(x, grad, hess, idx, depth);
    for (std::size_t i = 0; i < y.size(); ++i)
      score[i] += lr * tree->predict(x[i]);
  }
  std::vector<double> probs(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) probs[i] = sigmoid(score[i]);
  return classification_metrics(y, probs, 0.5).f1;
}

}  // namespace

TEST_CASE("logreg separates a separable toy set") {
  auto m = make_matrix({{0.0, 0.0}, {0.1, 0.2}, {1.0, 1.0}, {0.9, 1.1}},
                       {0, 0, 1, 1});
  auto model = train(m, HyperParams::logreg(0.001, 7));
  CHECK(training_f1(model, m) == 1.0);
  auto scores = predict_proba(model, m);
  for (double s : scores) CHECK((s >= 0.0 && s <= 1.0));
}

TEST_CASE("logreg rejects bad input") {
  auto single = make_matrix({{0.0}, {1.0}}, {1, 1});
  CHECK_THROWS(train(single, HyperParams::logreg(0.1, 0)));
  CHECK_THROWS(train(FeatureMatrix(FeatureSchema{}), HyperParams::logreg(0.1, 0)));
}

TEST_CASE("zero-weight logreg scores 0.5 everywhere") {
  LogRegModel lr;
  lr.weights = {0.0, 0.0};
  lr.bias = 0.0;
  lr.mean = {0.0, 0.0};
  lr.stdev = {1.0, 1.0};
  double x[4] = {3.0, -1.0, 0.5, 2.0};
  auto scores = predict_logreg(lr, x, 2, 2);
  CHECK(scores[0] == 0.5);
  CHECK(scores[1] == 0.5);
}

TEST_CASE("logistic gradient matches central finite differences") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    std::size_t n = 8 + rng.below(20), d = 2 + rng.below(5);
    std::vector<double> x(n * d);
    std::vector<int> y(n);
    for (auto& v : x) v = rng.normal(0, 1);
    for (auto& v : y) v = rng.uniform() < 0.5;
    Dataset data{x.data(), y.data(), n, d};
    std::vector<double> w(d), sw(n, 1.0);
    for (auto& v : w) v = rng.normal(0, 0.5);
    double b = rng.normal(0, 0.5);

    std::vector<double> grad(d);
    double bias_grad = 0;
    logistic_loss_grad(data, w, b, sw, grad, bias_grad);

    const double eps = 1e-6;
    for (std::size_t j = 0; j < d; ++j) {
      auto wp = w, wm = w;
      wp[j] += eps;
      wm[j] -= eps;
      double fd = (logistic_loss(data, wp, b, sw) - logistic_loss(data, wm, b, sw)) /
                  (2 * eps);
      double tol = 1e-5 * std::max(1e-3, std::fabs(fd));
      CHECK(std::fabs(grad[j] - fd) <= tol);
    }
    double fd_b = (logistic_loss(data, w, b + eps, sw) -
                   logistic_loss(data, w, b - eps, sw)) /
                  (2 * eps);
    CHECK(std::fabs(bias_grad - fd_b) <= 1e-5 * std::max(1e-3, std::fabs(fd_b)));
  }
}

TEST_CASE("boosting per-sample gradient matches finite differences") {
  Rng rng(3);
  for (int k = 0; k < 20; ++k) {
    double f = rng.normal(0, 2);
    int y = rng.uniform() < 0.5;
    auto loss = [&](double v) {
      double p = sigmoid(v);
      return -(y * std::log(p) + (1 - y) * std::log(1 - p));
    };
    double eps = 1e-6;
    double fd = (loss(f + eps) - loss(f - eps)) / (2 * eps);
    double analytic = sigmoid(f) - y;  // the boosting residual is y - p
    CHECK(std::fabs(analytic - fd) <= 1e-5 * std::max(1e-3, std::fabs(fd)));
  }
}

TEST_CASE("l1 sparsity is monotone in the penalty") {
  Rng rng(11);
  auto m = random_matrix(rng, 120, 8);
  std::size_t prev_nnz = SIZE_MAX;
  for (double l1 : {0.001, 0.01, 0.1, 1.0, 10.0}) {
    auto model = train(m, HyperParams::logreg(l1, 5));
    const auto& lr = std::get<LogRegModel>(model.impl);
    std::size_t nnz = 0;
    for (double w : lr.weights) nnz += w != 0.0;
    CHECK(nnz <= prev_nnz);
    prev_nnz = nnz;
  }
  // the strongest penalty actually bites
  CHECK(prev_nnz == 0);
}

TEST_CASE("forest basics") {
  Rng rng(21);
  auto m = random_matrix(rng, 300, 6);
  auto params = HyperParams::random_forest(30, 6, 17);
  auto model = train(m, params);
  const auto& rf = std::get<ForestModel>(model.impl);
  REQUIRE(rf.trees.size() == 30);

  SUBCASE("depth never exceeds the limit") {
    for (const auto& tree : rf.trees) CHECK(tree.depth() <= 6);
  }

  SUBCASE("thresholds are midpoints of observed value pairs") {
    for (const auto& tree : rf.trees)
      for (const auto& node : tree.nodes) {
        if (node.feature < 0) continue;
        std::set<double> values;
        for (std::size_t i = 0; i < m.rows(); ++i)
          values.insert(m.row(i)[node.feature]);
        CHECK(node.threshold >= *values.begin());
        CHECK(node.threshold < *values.rbegin());
        bool derived = values.count(node.threshold) > 0;
        if (!derived) {
          std::vector<double> v(values.begin(), values.end());
          for (std::size_t a = 0; a < v.size() && !derived; ++a)
            for (std::size_t b = a + 1; b < v.size() && !derived; ++b)
              if (node.threshold == v[a] + 0.5 * (v[b] - v[a])) derived = true;
        }
        CHECK(derived);
      }
  }

  SUBCASE("score is invariant under tree permutation") {
    auto scores = predict_proba(model, m);
    Model shuffled = model;
    auto& trees = std::get<ForestModel>(shuffled.impl).trees;
    std::reverse(trees.begin(), trees.end());
    auto scores2 = predict_proba(shuffled, m);
    for (std::size_t i = 0; i < scores.size(); ++i)
      CHECK(scores[i] == doctest::Approx(scores2[i]).epsilon(1e-12));
  }

  SUBCASE("importances sum to one") {
    auto imp = feature_importance(model);
    double total = 0;
    for (const auto& [name, v] : imp) {
      CHECK(v >= 0.0);
      total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("unanimous forest scores 1.0") {
  ForestModel rf;
  for (int t = 0; t < 5; ++t) {
    Tree tree;
    tree.nodes.push_back({-1, 0.0, -1, -1, 1.0});
    rf.trees.push_back(tree);
  }
  double x[2] = {0.0, 0.0};
  auto scores = predict_forest(rf, x, 1, 2);
  CHECK(scores[0] == 1.0);
}

TEST_CASE("importance singles out the informative feature") {
  Rng rng(31);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 400; ++i) {
    std::vector<double> row(6);
    for (auto& v : row) v = rng.normal(0, 1);
    int label = row[3] > 0.0;  // only f3 carries signal
    rows.push_back(row);
    labels.push_back(label);
  }
  auto m = make_matrix(rows, labels);
  auto model = train(m, HyperParams::random_forest(40, 8, 3));
  auto imp = feature_importance(model);
  CHECK(imp.front().first == "f3");
  CHECK(imp.front().second > 0.5);
}

TEST_CASE("training is deterministic and thread-count independent") {
  Rng rng(41);
  auto m = random_matrix(rng, 200, 5);
  for (auto params : {HyperParams::random_forest(12, 6, 9),
                      HyperParams::gradient_boosting(15, 3, 0.1, 9),
                      HyperParams::logreg(0.01, 9)}) {
    auto a = serialize(train(m, params));
#ifdef _OPENMP
    int saved = omp_get_max_threads();
    omp_set_num_threads(1);
#endif
    auto b = serialize(train(m, params));
#ifdef _OPENMP
    omp_set_num_threads(saved);
#endif
    CHECK(a == b);
  }
}

TEST_CASE("boosting learns xor") {
  std::vector<std::vector<double>> x{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  std::vector<int> y{0, 1, 1, 0};

  // the naive exhaustive boosting loop confirms the expected bound
  CHECK(naive_boost_f1(x, y, 100, 3, 0.05) >= 0.99);

  auto m = make_matrix(x, y);
  auto model = train(m, HyperParams::gradient_boosting(100, 3, 0.05, 1));
  CHECK(training_f1(model, m) >= 0.99);
}

TEST_CASE("zero-estimator boosting scores the prior") {
  std::vector<std::vector<double>> x{{0.0}, {1.0}, {2.0}, {3.0}};
  std::vector<int> y{1, 0, 0, 0};
  BoostModel gb;
  gb.base_score = std::log(0.25 / 0.75);
  auto scores = predict_boosting(gb, make_matrix(x, y).values().data(), 4, 1);
  for (double s : scores) CHECK(s == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("boosting converges to the prior as lr -> 0") {
  Rng rng(51);
  auto m = random_matrix(rng, 80, 4);
  double prior = static_cast<double>(m.count_label(1)) / m.rows();
  auto model = train(m, HyperParams::gradient_boosting(100, 3, 1e-8, 2));
  auto scores = predict_proba(model, m);
  for (double s : scores) CHECK(std::fabs(s - prior) < 1e-4);
}

TEST_CASE("boosting keeps trees in training order") {
  Rng rng(61);
  auto m = random_matrix(rng, 100, 4);
  auto model = train(m, HyperParams::gradient_boosting(10, 2, 0.3, 4));
  auto blob = serialize(model);
  auto restored = deserialize(blob);
  const auto& a = std::get<BoostModel>(model.impl).trees;
  const auto& b = std::get<BoostModel>(restored.impl).trees;
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].nodes.size() == b[i].nodes.size());
    for (std::size_t k = 0; k < a[i].nodes.size(); ++k) {
      CHECK(a[i].nodes[k].feature == b[i].nodes[k].feature);
      CHECK(a[i].nodes[k].threshold == b[i].nodes[k].threshold);
      CHECK(a[i].nodes[k].value == b[i].nodes[k].value);
    }
  }
}

TEST_CASE("serialization round-trips scores exactly") {
  Rng rng(71);
  auto m = random_matrix(rng, 150, 5);
  for (auto params : {HyperParams::random_forest(10, 5, 3),
                      HyperParams::gradient_boosting(12, 3, 0.1, 3),
                      HyperParams::logreg(0.05, 3)}) {
    auto model = train(m, params);
    auto blob = serialize(model);
    CHECK(blob == serialize(model));  // stable bytes
    auto restored = deserialize(blob);
    auto a = predict_proba(model, m);
    auto b = predict_proba(restored, m);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }
}

TEST_CASE("corrupted model documents are rejected") {
  Rng rng(81);
  auto m = random_matrix(rng, 60, 3);
  auto blob = serialize(train(m, HyperParams::random_forest(5, 4, 1)));

  // flip a digit inside the payload
  auto pos = blob.find("\"threshold\"");
  REQUIRE(pos != std::string::npos);
  auto digit = blob.find_first_of("0123456789", pos + 12);
  REQUIRE(digit != std::string::npos);
  blob[digit] = blob[digit] == '9' ? '8' : '9';
  CHECK_THROWS_WITH(deserialize(blob), doctest::Contains("checksum"));

  CHECK_THROWS(deserialize("not json at all"));
  CHECK_THROWS(deserialize("{\"format\":\"something-else\"}"));
}

TEST_CASE("schema mismatch names the first differing column") {
  Rng rng(91);
  auto m = random_matrix(rng, 50, 3);
  auto model = train(m, HyperParams::random_forest(3, 3, 1));

  FeatureSchema other;
  other.columns = {{"f0", ""}, {"weird", ""}, {"f2", ""}};
  FeatureMatrix m2(other);
  m2.add_row(RowKey{"s", {}, 0}, std::vector<double>{1, 2, 3}, 0);
  CHECK_THROWS_WITH(predict_proba(model, m2), doctest::Contains("weird"));
}

TEST_CASE("grid search cell counts and tie-breaks") {
  Rng rng(101);
  auto m = random_matrix(rng, 90, 4);

  SUBCASE("forest grid over tree counts") {
    std::vector<HyperParams> grid;
    for (int trees : {10, 50, 100, 200})
      grid.push_back(HyperParams::random_forest(trees, 4, 11));
    auto result = grid_search(m, ModelFamily::random_forest, grid, 3, 1);
    CHECK(result.cell_mean_f1.size() == 4);
  }

  SUBCASE("boosting grid is 3x3x3") {
    std::vector<HyperParams> grid;
    for (int est : {50, 100, 200})
      for (int depth : {3, 5, 7})
        for (double lr : {0.01, 0.05, 0.1})
          grid.push_back(HyperParams::gradient_boosting(est, depth, lr, 11));
    auto result = grid_search(m, ModelFamily::gradient_boosting, grid, 3, 1);
    CHECK(result.cell_mean_f1.size() == 27);
  }

  SUBCASE("singleton grid returns its cell") {
    std::vector<HyperParams> grid{HyperParams::random_forest(7, 3, 2)};
    auto result = grid_search(m, ModelFamily::random_forest, grid, 2, 1);
    CHECK(result.best.n_trees == 7);
    CHECK(result.cell_mean_f1.size() == 1);
  }

  SUBCASE("equal-scoring cells prefer the smaller model") {
    // a perfectly separable set where every cell reaches F1 = 1
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
      rows.push_back({i < 20 ? -5.0 + 0.01 * i : 5.0 + 0.01 * i});
      labels.push_back(i < 20 ? 0 : 1);
    }
    auto sep = make_matrix(rows, labels);
    std::vector<HyperParams> grid{HyperParams::random_forest(200, 8, 3),
                                  HyperParams::random_forest(10, 4, 3)};
    auto result = grid_search(sep, ModelFamily::random_forest, grid, 2, 1);
    CHECK(result.cell_mean_f1[0] == result.cell_mean_f1[1]);
    CHECK(result.best.n_trees == 10);
  }

  SUBCASE("too few positives for the fold count") {
    std::vector<std::vector<double>> rows{{0.0}, {1.0}, {2.0}, {3.0}};
    std::vector<int> labels{1, 0, 0, 0};
    auto tiny = make_matrix(rows, labels);
    std::vector<HyperParams> grid{HyperParams::random_forest(3, 2, 1)};
    CHECK_THROWS_WITH(grid_search(tiny, ModelFamily::random_forest, grid, 2, 1),
                      doctest::Contains("k <="));
  }
}

TEST_CASE("ensembles tolerate a single-class input") {
  std::vector<std::vector<double>> rows{{0.0}, {1.0}, {2.0}};
  std::vector<int> labels{0, 0, 0};
  auto m = make_matrix(rows, labels);

  auto rf = train(m, HyperParams::random_forest(3, 3, 1));
  for (double s : predict_proba(rf, m)) CHECK(s == 0.0);

  auto gb = train(m, HyperParams::gradient_boosting(3, 2, 0.1, 1));
  for (double s : predict_proba(gb, m)) CHECK(s < 1e-9);
}

TEST_CASE("non-finite features are rejected") {
  FeatureSchema schema;
  schema.columns = {{"f0", ""}};
  FeatureMatrix m(schema);
  m.add_row(RowKey{"s", {}, 0}, std::vector<double>{1.0}, 1);
  m.add_row(RowKey{"s", {}, 1}, std::vector<double>{std::nan("")}, 0);
  CHECK_THROWS(train(m, HyperParams::random_forest(3, 3, 1)));
}
