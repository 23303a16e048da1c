// Benchmark: the OpenMP aggregation kernel against its serial brute-force
// reference, and forest training at one thread vs all, with equality
// checks on the outputs.

#include <chrono>
#include <cstdio>
#include <sstream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "botflow/conn_log.hpp"
#include "botflow/featurize.hpp"
#include "botflow/models/model.hpp"
#include "botflow/reference/naive_features.hpp"
#include "botflow/synthgen.hpp"

using namespace botflow;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

int main(int argc, char** argv) {
  int hosts = argc > 1 ? std::atoi(argv[1]) : 30;
  double duration = argc > 2 ? std::atof(argv[2]) : 900.0;

  synth::SynthParams params;
  params.kind = synth::Kind::spam;
  params.n_background_hosts = hosts;
  params.duration_s = duration;
  params.n_bots = 2;
  params.imbalance_ratio = 40;
  params.seed = 17;
  params.scenario_id = "bench";
  auto scenario = synth::gen_scenario(params);

  std::istringstream in(scenario.conn_log);
  auto log = parse_conn_log(in);
  std::printf("scenario: %zu records, %d hosts, %.0fs capture\n",
              log.records.size(), hosts, duration);

  FeaturizeConfig cfg;
  cfg.representation = Representation::traffic_temporal;
  cfg.window_len = 30.0;

  auto t0 = std::chrono::steady_clock::now();
  auto fast = featurize_dataset(log.records, scenario.spec, cfg);
  double t_fast = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  auto naive = reference::featurize_dataset_naive(log.records, scenario.spec, cfg);
  double t_naive = seconds_since(t0);

  bool equal = fast.to_csv() == naive.to_csv();
  std::printf("featurize %zux%zu: parallel %.3fs | naive serial %.3fs | "
              "speedup %.1fx | outputs %s\n",
              fast.rows(), fast.cols(), t_fast, t_naive, t_naive / t_fast,
              equal ? "identical" : "DIFFER");

  auto rf = models::HyperParams::random_forest(100, 12, 99);
#ifdef _OPENMP
  int max_threads = omp_get_max_threads();
  omp_set_num_threads(1);
#endif
  t0 = std::chrono::steady_clock::now();
  auto serial_model = models::serialize(models::train(fast, rf));
  double t_serial = seconds_since(t0);
#ifdef _OPENMP
  omp_set_num_threads(max_threads);
#endif
  t0 = std::chrono::steady_clock::now();
  auto parallel_model = models::serialize(models::train(fast, rf));
  double t_parallel = seconds_since(t0);

  std::printf("forest 100x12: 1 thread %.3fs | all threads %.3fs | "
              "speedup %.1fx | models %s\n",
              t_serial, t_parallel, t_serial / t_parallel,
              serial_model == parallel_model ? "identical" : "DIFFER");
  return equal && serial_model == parallel_model ? 0 : 1;
}
