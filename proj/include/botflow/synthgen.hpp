#pragma once

#include <cstdint>
#include <string>

#include "botflow/scenario_spec.hpp"

namespace botflow::synth {

enum class Kind { spam, ddos };

/// Generator knobs. imbalance_ratio is the approximate benign:malicious
/// aggregated-row ratio at a 30 s window: the spam kind targets it under
/// coarse labels, the ddos kind under fine labels (its bots are active
/// in every window, so the coarse ratio is fixed by host counts).
struct SynthParams {
  Kind kind = Kind::spam;
  int n_background_hosts = 50;
  double duration_s = 1800.0;
  int n_bots = 2;
  double imbalance_ratio = 134.0;
  std::uint64_t seed = 1;
  std::string scenario_id = "synth-1";
  double t0 = 1313368800.0;
};

struct Scenario {
  std::string conn_log;  // full Zeek TSV document
  botflow::ScenarioSpec spec;
};

/// Fully determined by the params (same params -> byte-identical log).
///
/// spam: bots blast short tcp/25 bursts at many /24-spread destinations
/// in a subset of windows; every record's field marginals are drawn from
/// the same samplers as background traffic, so single rows carry no
/// signal beyond the destination port mix and only aggregates separate
/// the classes. Two background hosts are bulk mailers that send port-25
/// traffic to a wide pool at a modest rate.
///
/// ddos: bots flood one victim with high-rate constant udp/161 and
/// icmp/8 records during attack windows, and emit ordinary background
/// traffic the rest of the time (which coarse labeling mislabels).
Scenario gen_scenario(const SynthParams& params);

/// Frozen three-scenario sets used by the acceptance experiments.
SynthParams spam_preset(int index);
SynthParams ddos_preset(int index);

}  // namespace botflow::synth
