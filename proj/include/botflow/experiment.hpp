#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "botflow/featurize.hpp"
#include "botflow/metrics.hpp"
#include "botflow/models/model.hpp"

namespace botflow {

struct ScenarioData {
  ScenarioSpec spec;
  std::vector<ConnRecord> records;
};

/// One leave-one-scenario-out run: which scenario is held out, how to
/// featurize, and what to train.
struct ExperimentSpec {
  std::string name;
  std::string test_scenario;
  FeaturizeConfig featurize;
  models::HyperParams model;
  double threshold = 0.5;

  nlohmann::json to_json() const;
};

struct EvalReport {
  ConfusionMetrics metrics;
  double roc_auc = 0.0;
  double pr_auc = 0.0;
  PrCurve curve;
  std::vector<std::pair<std::string, double>> importance;
  std::int64_t rows_pos = 0, rows_neg = 0;
  nlohmann::json config;

  nlohmann::json to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

/// Train = concatenation of every other scenario in the given order,
/// test = the held-out one. Schemas must agree.
std::pair<FeatureMatrix, FeatureMatrix> scenario_split(
    const std::vector<std::pair<std::string, FeatureMatrix>>& per_scenario,
    const std::string& test_id);

/// featurize -> label -> split -> train -> score -> metrics. Errors from
/// any stage are rethrown with the stage name prepended.
EvalReport run_experiment(const ExperimentSpec& spec,
                          const std::vector<ScenarioData>& data);

/// One run_experiment per window length, same split.
std::vector<std::pair<double, EvalReport>> window_sweep(
    const ExperimentSpec& base, std::span<const double> windows,
    const std::vector<ScenarioData>& data);

/// The window list from the sweep experiments: 1..600 seconds.
std::span<const double> default_sweep_windows();

}  // namespace botflow
