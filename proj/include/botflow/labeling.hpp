#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>

#include "botflow/conn_record.hpp"
#include "botflow/scenario_spec.hpp"

namespace botflow {

enum class Label : int { legitimate = 0, malicious = 1 };

enum class LabelRegime { coarse, fine };

std::optional<LabelRegime> parse_label_regime(std::string_view text);
std::string_view label_regime_name(LabelRegime regime);

struct LabelOptions {
  /// When set, the coarse rule only looks at the originating endpoint.
  bool coarse_origin_only = false;
};

/// Coarse rule: a record is malicious if either endpoint is a botnet IP
/// (origin only when so configured).
inline Label label_record_coarse(const ConnRecord& rec, const ScenarioSpec& spec,
                                 const LabelOptions& opts = {}) {
  bool hit = spec.botnet_ips.count(rec.orig_h) > 0;
  if (!opts.coarse_origin_only)
    hit = hit || spec.botnet_ips.count(rec.dest_h) > 0;
  return hit ? Label::malicious : Label::legitimate;
}

/// Fine rule: malicious only for attack flows from a botnet IP to a
/// victim IP.
inline Label label_record_fine(const ConnRecord& rec, const ScenarioSpec& spec) {
  if (spec.victim_ips.empty())
    throw std::invalid_argument("fine labeling unavailable: manifest lists no victim_ips");
  bool hit = spec.botnet_ips.count(rec.orig_h) > 0 &&
             spec.victim_ips.count(rec.dest_h) > 0;
  return hit ? Label::malicious : Label::legitimate;
}

inline Label label_record(const ConnRecord& rec, const ScenarioSpec& spec,
                          LabelRegime regime, const LabelOptions& opts = {}) {
  return regime == LabelRegime::coarse ? label_record_coarse(rec, spec, opts)
                                       : label_record_fine(rec, spec);
}

/// A window is malicious if it contains at least one malicious record.
inline Label label_window(std::span<const Label> labels) {
  if (labels.empty())
    throw std::invalid_argument("label_window: empty label set");
  for (Label l : labels)
    if (l == Label::malicious) return Label::malicious;
  return Label::legitimate;
}

}  // namespace botflow
