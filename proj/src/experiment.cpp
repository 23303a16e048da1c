#include "botflow/experiment.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace botflow {

using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

template <typename F>
auto stage(const char* name, F&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(name) + ": " + e.what());
  }
}

json buckets_to_json(const PortBucketConfig& cfg) {
  json out = json::array();
  for (const auto& b : cfg.buckets) {
    json j{{"name", b.name}, {"ports", b.ports}};
    if (b.icmp_type) j["icmp_type"] = *b.icmp_type;
    out.push_back(j);
  }
  return out;
}

}  // namespace

json ExperimentSpec::to_json() const {
  return json{
      {"name", name},
      {"test_scenario", test_scenario},
      {"representation", std::string(representation_name(featurize.representation))},
      {"window_len", featurize.window_len},
      {"labeling", std::string(label_regime_name(featurize.regime))},
      {"coarse_origin_only", featurize.label_options.coarse_origin_only},
      {"buckets", buckets_to_json(featurize.buckets)},
      {"model", json{{"family", std::string(models::model_family_name(model.family))},
                     {"l1_strength", model.l1_strength},
                     {"n_trees", model.n_trees},
                     {"n_estimators", model.n_estimators},
                     {"max_depth", model.max_depth},
                     {"learning_rate", model.learning_rate},
                     {"class_weighted", model.class_weighted},
                     {"seed", model.seed}}},
      {"threshold", threshold},
  };
}

json EvalReport::to_json() const {
  json pr = json::array();
  for (const auto& p : curve.points)
    pr.push_back(json::array({p.recall, p.precision}));
  json imp = json::array();
  for (const auto& [name, value] : importance)
    imp.push_back(json::array({name, value}));
  return json{
      {"format", "botflow-report"},
      {"version", 1},
      {"config", config},
      {"counts", json{{"tp", metrics.tp},
                      {"fp", metrics.fp},
                      {"tn", metrics.tn},
                      {"fn", metrics.fn},
                      {"rows", rows_pos + rows_neg},
                      {"pos", rows_pos},
                      {"neg", rows_neg}}},
      {"precision", metrics.precision},
      {"recall", metrics.recall},
      {"f1", metrics.f1},
      {"roc_auc", roc_auc},
      {"pr_auc", pr_auc},
      {"pr_curve", pr},
      {"importance", imp},
  };
}

std::string EvalReport::csv_header() {
  return "experiment,test_scenario,representation,labeling,window,model,"
         "tp,fp,tn,fn,precision,recall,f1,roc_auc,pr_auc,rows_pos,rows_neg";
}

std::string EvalReport::csv_row() const {
  std::ostringstream out;
  out << config.value("name", "") << ',' << config.value("test_scenario", "") << ','
      << config.value("representation", "") << ',' << config.value("labeling", "") << ','
      << format_double(config.value("window_len", 0.0)) << ','
      << config["model"].value("family", "") << ',' << metrics.tp << ',' << metrics.fp
      << ',' << metrics.tn << ',' << metrics.fn << ',' << format_double(metrics.precision)
      << ',' << format_double(metrics.recall) << ',' << format_double(metrics.f1) << ','
      << format_double(roc_auc) << ',' << format_double(pr_auc) << ',' << rows_pos << ','
      << rows_neg;
  return out.str();
}

std::pair<FeatureMatrix, FeatureMatrix> scenario_split(
    const std::vector<std::pair<std::string, FeatureMatrix>>& per_scenario,
    const std::string& test_id) {
  const FeatureMatrix* test = nullptr;
  std::vector<const FeatureMatrix*> train_parts;
  for (const auto& [id, matrix] : per_scenario) {
    if (id == test_id)
      test = &matrix;
    else
      train_parts.push_back(&matrix);
  }
  if (!test) throw std::invalid_argument("unknown test scenario '" + test_id + "'");
  if (train_parts.empty())
    throw std::invalid_argument("scenario split needs at least two scenarios");

  auto names = test->schema().names();
  for (const FeatureMatrix* part : train_parts)
    if (part->schema().names() != names)
      throw std::invalid_argument("scenario schemas differ; featurize with equal configs");

  return {concat_rows(train_parts), *test};
}

EvalReport run_experiment(const ExperimentSpec& spec,
                          const std::vector<ScenarioData>& data) {
  if (data.size() < 2)
    throw std::invalid_argument("experiment needs at least two scenarios");

  std::vector<std::pair<std::string, FeatureMatrix>> matrices;
  for (const ScenarioData& sd : data) {
    auto m = stage(("featurize(" + sd.spec.scenario_id + ")").c_str(), [&] {
      return featurize_dataset(sd.records, sd.spec, spec.featurize);
    });
    matrices.emplace_back(sd.spec.scenario_id, std::move(m));
  }

  auto [train_m, test_m] =
      stage("split", [&] { return scenario_split(matrices, spec.test_scenario); });

  auto model = stage("train", [&] { return models::train(train_m, spec.model); });
  auto scores = stage("score", [&] { return models::predict_proba(model, test_m); });

  EvalReport report;
  stage("metrics", [&] {
    report.metrics = classification_metrics(test_m.labels(), scores, spec.threshold);
    report.roc_auc = roc_auc(test_m.labels(), scores);
    report.curve = pr_curve(test_m.labels(), scores);
    report.pr_auc = report.curve.pr_auc;
    return 0;
  });
  report.importance = stage("importance", [&] { return models::feature_importance(model); });
  report.rows_pos = static_cast<std::int64_t>(test_m.count_label(1));
  report.rows_neg = static_cast<std::int64_t>(test_m.count_label(0));

  report.config = spec.to_json();
  json scenario_ids = json::array();
  for (const auto& sd : data) scenario_ids.push_back(sd.spec.scenario_id);
  report.config["scenarios"] = scenario_ids;
  return report;
}

std::vector<std::pair<double, EvalReport>> window_sweep(
    const ExperimentSpec& base, std::span<const double> windows,
    const std::vector<ScenarioData>& data) {
  if (windows.empty()) throw std::invalid_argument("window sweep: empty window list");
  for (double w : windows)
    if (!(w > 0)) throw std::invalid_argument("window sweep: windows must be > 0");

  std::vector<std::pair<double, EvalReport>> out;
  for (double w : windows) {
    ExperimentSpec spec = base;
    spec.featurize.window_len = w;
    out.emplace_back(w, run_experiment(spec, data));
  }
  return out;
}

std::span<const double> default_sweep_windows() {
  static const double windows[] = {1, 10, 30, 60, 120, 240, 600};
  return windows;
}

}  // namespace botflow
