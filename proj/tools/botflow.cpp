// botflow: offline botnet-detection pipeline over Zeek conn.log files.
//
// Subcommands: synth, featurize, label, train, experiment, sweep,
// importance. Outputs are written atomically (temp file + rename) and
// every artifact embeds the resolved configuration, so reruns with the
// same inputs and seed are byte-identical.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "botflow/conn_log.hpp"
#include "botflow/experiment.hpp"
#include "botflow/synthgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace botflow;

namespace {

/// Wrong invocation or unusable input; exits with code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const std::string& path, const char* what) {
  if (!fs::exists(path))
    throw UsageError(std::string(what) + " not found: " + path);
}

fs::path resolve_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("BOTFLOW_OUT")) return env;
  return ".";
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ||
            c == '.')
               ? c
               : '_';
  return out;
}

struct FeaturizeOpts {
  std::string conn_path, manifest_path;
  std::string rep = "traffic";
  double window = 30.0;
  std::string regime = "coarse";
  bool coarse_origin_only = false;

  FeaturizeConfig to_config() const {
    FeaturizeConfig cfg;
    auto r = parse_representation(rep);
    if (!r) throw UsageError("unknown representation: " + rep);
    cfg.representation = *r;
    if (!(window > 0)) throw UsageError("window must be > 0");
    cfg.window_len = window;
    auto l = parse_label_regime(regime);
    if (!l) throw UsageError("unknown labeling regime: " + regime);
    cfg.regime = *l;
    cfg.label_options.coarse_origin_only = coarse_origin_only;
    return cfg;
  }
};

ScenarioData load_scenario(const std::string& conn_path,
                           const std::string& manifest_path) {
  require_file(conn_path, "conn.log");
  require_file(manifest_path, "manifest");
  ScenarioData data;
  data.spec = parse_scenario_spec_file(manifest_path);
  auto log = parse_conn_log_file(conn_path);
  if (!log.stats.ignored_columns.empty()) {
    std::cerr << "note: ignored " << log.stats.ignored_columns.size()
              << " unmapped column(s):";
    for (const auto& c : log.stats.ignored_columns) std::cerr << ' ' << c;
    std::cerr << '\n';
  }
  data.records = std::move(log.records);
  return data;
}

models::HyperParams model_from_json(const json& j) {
  auto family = models::parse_model_family(j.value("family", "random_forest"));
  if (!family) throw UsageError("unknown model family in config");
  models::HyperParams p;
  switch (*family) {
    case models::ModelFamily::logreg:
      p = models::HyperParams::logreg(j.value("l1_strength", 0.01));
      break;
    case models::ModelFamily::random_forest:
      p = models::HyperParams::random_forest(j.value("n_trees", 100),
                                             j.value("max_depth", 12));
      break;
    case models::ModelFamily::gradient_boosting:
      p = models::HyperParams::gradient_boosting(j.value("n_estimators", 100),
                                                 j.value("max_depth", 3),
                                                 j.value("learning_rate", 0.05));
      break;
  }
  p.class_weighted = j.value("class_weighted", false);
  p.seed = j.value("seed", std::uint64_t{0});
  return p;
}

std::string pr_curve_csv(const EvalReport& report) {
  std::string out = "# config: " + report.config.dump() + "\nrecall,precision\n";
  for (const auto& p : report.curve.points)
    out += format_double(p.recall) + "," + format_double(p.precision) + "\n";
  return out;
}

std::string importance_csv(const std::vector<std::pair<std::string, double>>& imp,
                           const std::string& config_echo) {
  std::string out;
  if (!config_echo.empty()) out += "# config: " + config_echo + "\n";
  out += "feature,importance\n";
  for (const auto& [name, value] : imp)
    out += name + "," + format_double(value) + "\n";
  return out;
}

int cmd_synth(const std::string& preset, const std::string& kind, int hosts,
              int bots, double duration, double imbalance, std::uint64_t seed,
              std::string id, int scenario_index, const std::string& out_flag) {
  synth::SynthParams params;
  if (!preset.empty()) {
    if (preset == "spam")
      params = synth::spam_preset(scenario_index);
    else if (preset == "ddos")
      params = synth::ddos_preset(scenario_index);
    else
      throw UsageError("unknown preset '" + preset + "' (expected spam or ddos)");
  } else {
    if (kind == "spam") params.kind = synth::Kind::spam;
    else if (kind == "ddos") params.kind = synth::Kind::ddos;
    else throw UsageError("unknown kind '" + kind + "' (expected spam or ddos)");
    params.n_background_hosts = hosts;
    params.n_bots = bots;
    params.duration_s = duration;
    params.imbalance_ratio = imbalance;
    params.seed = seed;
    if (!id.empty()) params.scenario_id = std::move(id);
  }

  synth::Scenario scenario;
  try {
    scenario = synth::gen_scenario(params);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  fs::path dir = resolve_out_dir(out_flag);
  write_file_atomic(dir / "conn.log", scenario.conn_log);
  write_file_atomic(dir / "manifest.txt", format_scenario_spec(scenario.spec));
  std::cout << "wrote " << (dir / "conn.log").string() << " and "
            << (dir / "manifest.txt").string() << " (scenario "
            << scenario.spec.scenario_id << ")\n";
  return 0;
}

int cmd_featurize(const FeaturizeOpts& opts, const std::string& out_path) {
  auto data = load_scenario(opts.conn_path, opts.manifest_path);
  auto cfg = opts.to_config();
  auto matrix = featurize_dataset(data.records, data.spec, cfg);

  json echo{{"command", "featurize"},
            {"scenario", data.spec.scenario_id},
            {"representation", opts.rep},
            {"window_len", opts.window},
            {"labeling", opts.regime},
            {"coarse_origin_only", opts.coarse_origin_only}};
  write_file_atomic(out_path, matrix.to_csv(echo.dump()));

  std::size_t pos = matrix.count_label(1);
  std::cout << "rows=" << matrix.rows() << " cols=" << matrix.cols()
            << " malicious=" << pos << " legitimate=" << matrix.rows() - pos << "\n";
  return 0;
}

int cmd_label(const std::string& conn_path, const std::string& manifest_path,
              const std::string& regime_name, const std::string& out_path) {
  auto data = load_scenario(conn_path, manifest_path);
  auto regime = parse_label_regime(regime_name);
  if (!regime) throw UsageError("unknown labeling regime: " + regime_name);

  std::string out = "ts,orig_h,orig_p,dest_h,dest_p,proto,label\n";
  std::size_t malicious = 0;
  for (const auto& rec : data.records) {
    Label label = label_record(rec, data.spec, *regime);
    malicious += label == Label::malicious;
    out += format_double(rec.ts) + "," + rec.orig_h.str() + "," +
           std::to_string(rec.orig_p) + "," + rec.dest_h.str() + "," +
           std::to_string(rec.dest_p) + "," + std::string(proto_name(rec.proto)) +
           "," + std::to_string(static_cast<int>(label)) + "\n";
  }
  write_file_atomic(out_path, out);
  std::cout << "records=" << data.records.size() << " malicious=" << malicious
            << " legitimate=" << data.records.size() - malicious << "\n";
  return 0;
}

int cmd_train(const std::string& features_path, const std::string& family,
              int trees, int depth, int estimators, double lr, double l1,
              bool class_weighted, std::uint64_t seed, const std::string& out_path) {
  require_file(features_path, "feature CSV");
  auto matrix = FeatureMatrix::read_csv_file(features_path);

  auto fam = models::parse_model_family(family);
  if (!fam) throw UsageError("unknown model family: " + family);
  models::HyperParams params;
  switch (*fam) {
    case models::ModelFamily::logreg:
      params = models::HyperParams::logreg(l1, seed);
      break;
    case models::ModelFamily::random_forest:
      params = models::HyperParams::random_forest(trees, depth > 0 ? depth : 12, seed);
      break;
    case models::ModelFamily::gradient_boosting:
      params = models::HyperParams::gradient_boosting(estimators, depth > 0 ? depth : 3,
                                                      lr, seed);
      break;
  }
  params.class_weighted = class_weighted;

  auto model = models::train(matrix, params);
  write_file_atomic(out_path, models::serialize(model));
  auto scores = models::predict_proba(model, matrix);
  auto m = classification_metrics(matrix.labels(), scores, 0.5);
  std::cout << "trained " << family << " on " << matrix.rows() << "x" << matrix.cols()
            << "; training F1=" << m.f1 << "\n";
  return 0;
}

int cmd_importance(const std::string& model_path, const std::string& out_path) {
  require_file(model_path, "model document");
  std::ifstream in(model_path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  auto model = models::deserialize(ss.str());
  auto imp = models::feature_importance(model);
  json echo{{"command", "importance"},
            {"family", std::string(models::model_family_name(model.params.family))}};
  write_file_atomic(out_path, importance_csv(imp, echo.dump()));
  if (model.params.family == models::ModelFamily::logreg)
    std::cerr << "note: logreg importances are normalized |weight|, not an "
                 "impurity measure\n";
  std::cout << "wrote " << imp.size() << " importances to " << out_path << "\n";
  return 0;
}

struct ExperimentConfig {
  std::string name;
  std::vector<std::pair<std::string, std::string>> scenario_paths;
  FeaturizeOpts featurize;
  models::HyperParams model;
  std::optional<json> grid;
  int grid_folds = 3;
  std::vector<std::string> test_scenarios;  // empty: every scenario in turn
  std::vector<double> windows;              // sweep only
  double threshold = 0.5;
};

ExperimentConfig parse_experiment_config(const std::string& path, bool sweep) {
  require_file(path, "experiment config");
  std::ifstream in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config parse failure: " + std::string(e.what()));
  }

  ExperimentConfig cfg;
  cfg.name = j.value("name", "experiment");
  if (!j.contains("scenarios") || j["scenarios"].size() < 2)
    throw UsageError("config must list at least two scenarios");
  for (const auto& s : j["scenarios"])
    cfg.scenario_paths.emplace_back(s.at("conn_log").get<std::string>(),
                                    s.at("manifest").get<std::string>());
  cfg.featurize.rep = j.value("representation", "traffic");
  cfg.featurize.window = j.value("window_len", 30.0);
  cfg.featurize.regime = j.value("labeling", "coarse");
  cfg.featurize.coarse_origin_only = j.value("coarse_origin_only", false);
  cfg.model = model_from_json(j.value("model", json::object()));
  if (j.contains("grid")) {
    cfg.grid = j["grid"];
    cfg.grid_folds = j.value("grid_folds", 3);
  }
  if (j.contains("test_scenarios")) {
    if (j["test_scenarios"].is_string()) {
      if (j["test_scenarios"] != "all")
        cfg.test_scenarios.push_back(j["test_scenarios"].get<std::string>());
    } else {
      for (const auto& t : j["test_scenarios"])
        cfg.test_scenarios.push_back(t.get<std::string>());
    }
  }
  cfg.threshold = j.value("threshold", 0.5);
  if (sweep) {
    if (j.contains("windows"))
      for (const auto& w : j["windows"]) cfg.windows.push_back(w.get<double>());
    else
      cfg.windows.assign(default_sweep_windows().begin(),
                         default_sweep_windows().end());
  }
  return cfg;
}

std::vector<models::HyperParams> expand_grid(const json& grid,
                                             const models::HyperParams& base) {
  auto list_of = [&](const char* key, std::vector<double> fallback) {
    std::vector<double> out;
    if (grid.contains(key))
      for (const auto& v : grid[key]) out.push_back(v.get<double>());
    if (out.empty()) out = std::move(fallback);
    return out;
  };

  std::vector<models::HyperParams> cells;
  switch (base.family) {
    case models::ModelFamily::random_forest:
      for (double trees : list_of("n_trees", {10, 50, 100, 200})) {
        auto p = base;
        p.n_trees = static_cast<int>(trees);
        cells.push_back(p);
      }
      break;
    case models::ModelFamily::gradient_boosting:
      for (double est : list_of("n_estimators", {50, 100, 200}))
        for (double depth : list_of("max_depth", {3, 5, 7}))
          for (double lr : list_of("learning_rate", {0.01, 0.05, 0.1})) {
            auto p = base;
            p.n_estimators = static_cast<int>(est);
            p.max_depth = static_cast<int>(depth);
            p.learning_rate = lr;
            cells.push_back(p);
          }
      break;
    case models::ModelFamily::logreg:
      for (double l1 : list_of("l1_strength", {0.001, 0.01, 0.1, 1.0})) {
        auto p = base;
        p.l1_strength = l1;
        cells.push_back(p);
      }
      break;
  }
  return cells;
}

int run_experiment_like(const std::string& config_path, const std::string& out_flag,
                        int jobs, bool sweep, std::uint64_t seed_override,
                        bool have_seed_override) {
  auto cfg = parse_experiment_config(config_path, sweep);
  if (have_seed_override) cfg.model.seed = seed_override;
  fs::path out_dir = resolve_out_dir(out_flag);
  fs::create_directories(out_dir);

  std::vector<ScenarioData> data;
  for (const auto& [conn, manifest] : cfg.scenario_paths)
    data.push_back(load_scenario(conn, manifest));

  std::vector<std::string> test_ids = cfg.test_scenarios;
  if (test_ids.empty())
    for (const auto& sd : data) test_ids.push_back(sd.spec.scenario_id);

  // optional grid search on the training side of the first split
  if (cfg.grid) {
    ExperimentSpec probe;
    probe.featurize = cfg.featurize.to_config();
    std::vector<std::pair<std::string, FeatureMatrix>> matrices;
    for (const auto& sd : data)
      matrices.emplace_back(sd.spec.scenario_id,
                            featurize_dataset(sd.records, sd.spec, probe.featurize));
    auto [train_m, test_m] = scenario_split(matrices, test_ids.front());
    auto cells = expand_grid(*cfg.grid, cfg.model);
    auto result = models::grid_search(train_m, cfg.model.family, cells,
                                      cfg.grid_folds, cfg.model.seed);
    cfg.model = result.best;
    std::cout << "grid search: " << cells.size() << " cells, best mean F1 = "
              << *std::max_element(result.cell_mean_f1.begin(),
                                   result.cell_mean_f1.end())
              << "\n";
  }

  struct Unit {
    double window;
    std::string test_id;
  };
  std::vector<Unit> units;
  if (sweep) {
    for (double w : cfg.windows)
      for (const auto& id : test_ids) units.push_back({w, id});
  } else {
    for (const auto& id : test_ids) units.push_back({cfg.featurize.window, id});
  }

  std::vector<EvalReport> reports(units.size());
  std::mutex io_mutex;
  auto run_unit = [&](std::size_t u) {
    ExperimentSpec spec;
    spec.name = cfg.name;
    spec.test_scenario = units[u].test_id;
    spec.featurize = cfg.featurize.to_config();
    spec.featurize.window_len = units[u].window;
    spec.model = cfg.model;
    spec.threshold = cfg.threshold;
    EvalReport report = run_experiment(spec, data);

    std::string stem = sanitize(cfg.name) +
                       (sweep ? ".w" + format_double(units[u].window) : "") + "." +
                       sanitize(units[u].test_id);
    {
      std::lock_guard<std::mutex> lock(io_mutex);
      write_file_atomic(out_dir / (stem + ".report.json"),
                        report.to_json().dump(1) + "\n");
      write_file_atomic(out_dir / (stem + ".pr.csv"), pr_curve_csv(report));
      write_file_atomic(out_dir / (stem + ".importance.csv"),
                        importance_csv(report.importance, report.config.dump()));
    }
    reports[u] = std::move(report);
  };

  if (jobs <= 1) {
    for (std::size_t u = 0; u < units.size(); ++u) run_unit(u);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (std::size_t u = next.fetch_add(1); u < units.size();
             u = next.fetch_add(1))
          run_unit(u);
      });
    for (auto& t : pool) t.join();
  }

  std::string summary = EvalReport::csv_header() + "\n";
  for (const auto& r : reports) summary += r.csv_row() + "\n";
  write_file_atomic(
      out_dir / (sanitize(cfg.name) + (sweep ? ".sweep.csv" : ".summary.csv")),
      summary);

  if (sweep) {
    std::string plot = "window,test_scenario,f1\n";
    for (std::size_t u = 0; u < units.size(); ++u)
      plot += format_double(units[u].window) + "," + units[u].test_id + "," +
              format_double(reports[u].metrics.f1) + "\n";
    write_file_atomic(out_dir / (sanitize(cfg.name) + ".f1_vs_window.csv"), plot);
  }

  for (std::size_t u = 0; u < units.size(); ++u)
    std::cout << (sweep ? "window " + format_double(units[u].window) + " " : "")
              << "test " << units[u].test_id << ": P=" << reports[u].metrics.precision
              << " R=" << reports[u].metrics.recall << " F1=" << reports[u].metrics.f1
              << " AUC=" << reports[u].roc_auc << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"offline botnet-detection pipeline over Zeek conn.log files"};
  app.require_subcommand(1);

  std::function<int()> action;

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic scenario");
  std::string synth_preset, synth_kind = "spam", synth_id, synth_out;
  int synth_hosts = 50, synth_bots = 2, synth_index = 0;
  double synth_duration = 1800, synth_imbalance = 134;
  std::uint64_t synth_seed = 1;
  synth_cmd->add_option("--preset", synth_preset, "spam or ddos frozen preset");
  synth_cmd->add_option("--scenario", synth_index, "preset scenario index (0-2)");
  synth_cmd->add_option("--kind", synth_kind, "spam or ddos");
  synth_cmd->add_option("--hosts", synth_hosts, "background host count");
  synth_cmd->add_option("--bots", synth_bots, "bot count");
  synth_cmd->add_option("--duration", synth_duration, "capture length, seconds");
  synth_cmd->add_option("--imbalance", synth_imbalance,
                        "target benign:malicious row ratio at T=30");
  synth_cmd->add_option("--seed", synth_seed, "generator seed");
  synth_cmd->add_option("--id", synth_id, "scenario id");
  synth_cmd->add_option("--out", synth_out, "output directory");
  synth_cmd->callback([&] {
    action = [&] {
      return cmd_synth(synth_preset, synth_kind, synth_hosts, synth_bots,
                       synth_duration, synth_imbalance, synth_seed, synth_id,
                       synth_index, synth_out);
    };
  });

  auto* feat_cmd = app.add_subcommand("featurize", "build a feature matrix CSV");
  FeaturizeOpts feat;
  std::string feat_out = "features.csv";
  feat_cmd->add_option("--conn", feat.conn_path, "conn.log path")->required();
  feat_cmd->add_option("--manifest", feat.manifest_path, "manifest path")->required();
  feat_cmd->add_option("--rep", feat.rep, "connection | traffic | traffic+temporal");
  feat_cmd->add_option("--window", feat.window, "window length, seconds");
  feat_cmd->add_option("--labeling", feat.regime, "coarse | fine");
  feat_cmd->add_flag("--coarse-origin-only", feat.coarse_origin_only,
                     "coarse rule looks at the originator only");
  feat_cmd->add_option("--out", feat_out, "output CSV path");
  feat_cmd->callback([&] {
    action = [&] { return cmd_featurize(feat, feat_out); };
  });

  auto* label_cmd = app.add_subcommand("label", "emit per-record labels");
  std::string label_conn, label_manifest, label_regime = "coarse",
                          label_out = "labels.csv";
  label_cmd->add_option("--conn", label_conn, "conn.log path")->required();
  label_cmd->add_option("--manifest", label_manifest, "manifest path")->required();
  label_cmd->add_option("--regime", label_regime, "coarse | fine");
  label_cmd->add_option("--out", label_out, "output CSV path");
  label_cmd->callback([&] {
    action = [&] {
      return cmd_label(label_conn, label_manifest, label_regime, label_out);
    };
  });

  auto* train_cmd =
      app.add_subcommand("train", "train a classifier from a feature CSV");
  std::string train_features, train_family = "random_forest",
                              train_out = "model.json";
  int train_trees = 100, train_depth = 0, train_estimators = 100;
  double train_lr = 0.05, train_l1 = 0.01;
  bool train_weighted = false;
  std::uint64_t train_seed = 0;
  train_cmd->add_option("--features", train_features, "feature CSV")->required();
  train_cmd->add_option("--family", train_family,
                        "logreg | random_forest | gradient_boosting");
  train_cmd->add_option("--trees", train_trees, "forest tree count");
  train_cmd->add_option("--depth", train_depth, "tree depth limit");
  train_cmd->add_option("--estimators", train_estimators, "boosting rounds");
  train_cmd->add_option("--lr", train_lr, "boosting learning rate");
  train_cmd->add_option("--l1", train_l1, "logreg L1 strength");
  train_cmd->add_flag("--class-weighted", train_weighted, "balance class weights");
  train_cmd->add_option("--seed", train_seed, "training seed");
  train_cmd->add_option("--out", train_out, "model output path");
  train_cmd->callback([&] {
    action = [&] {
      return cmd_train(train_features, train_family, train_trees, train_depth,
                       train_estimators, train_lr, train_l1, train_weighted,
                       train_seed, train_out);
    };
  });

  auto* imp_cmd =
      app.add_subcommand("importance", "rank features of a trained model");
  std::string imp_model, imp_out = "importance.csv";
  imp_cmd->add_option("--model", imp_model, "model document")->required();
  imp_cmd->add_option("--out", imp_out, "output CSV path");
  imp_cmd->callback([&] {
    action = [&] { return cmd_importance(imp_model, imp_out); };
  });

  for (bool sweep : {false, true}) {
    auto* cmd = app.add_subcommand(
        sweep ? "sweep" : "experiment",
        sweep ? "window sweep over a leave-one-scenario-out experiment"
              : "leave-one-scenario-out experiment from a config file");
    auto config_path = std::make_shared<std::string>();
    auto out_dir = std::make_shared<std::string>();
    auto jobs = std::make_shared<int>(1);
    auto seed = std::make_shared<std::uint64_t>(0);
    cmd->add_option("--config", *config_path, "experiment config JSON")->required();
    cmd->add_option("--out", *out_dir, "output directory");
    cmd->add_option("--jobs", *jobs, "parallel experiment units");
    auto* seed_opt = cmd->add_option("--seed", *seed, "override the config seed");
    cmd->callback([&action, config_path, out_dir, jobs, seed, seed_opt, sweep] {
      action = [config_path, out_dir, jobs, seed, seed_opt, sweep] {
        return run_experiment_like(*config_path, *out_dir, *jobs, sweep, *seed,
                                   seed_opt->count() > 0);
      };
    });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    return action();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
