#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "botflow/conn_record.hpp"
#include "botflow/feature_matrix.hpp"
#include "botflow/labeling.hpp"
#include "botflow/scenario_spec.hpp"
#include "botflow/window.hpp"

namespace botflow {

enum class Direction { outgoing, incoming };

struct EntityWindowKey {
  IpAddr ip;
  std::int64_t window = 0;
};

struct FeaturizeConfig {
  Representation representation = Representation::traffic;
  double window_len = 30.0;  // t0 is always the scenario t_start
  PortBucketConfig buckets = PortBucketConfig::defaults();
  LabelRegime regime = LabelRegime::coarse;
  LabelOptions label_options;
};

/// The fixed 24-wide connection-level vector (see connection_schema()).
std::vector<double> featurize_connection(const ConnRecord& rec);

/// Per-bucket traffic statistics plus the direction-level global block,
/// in schema order. `group` must hold records of one (entity, window):
/// outgoing means ip == orig_h, incoming means ip == dest_h; a mismatch
/// throws (caller bug). Empty buckets emit zeros.
std::vector<double> aggregate_traffic(const EntityWindowKey& key,
                                      const WindowConfig& window,
                                      std::span<const ConnRecord* const> group,
                                      Direction dir,
                                      const PortBucketConfig& buckets,
                                      const Cidr& internal_cidr);

/// Mean / population std / median / min / max of consecutive
/// inter-arrival gaps per bucket. Buckets with fewer than two records
/// emit zeros.
std::vector<double> aggregate_temporal(const EntityWindowKey& key,
                                       const WindowConfig& window,
                                       std::span<const ConnRecord* const> group,
                                       Direction dir,
                                       const PortBucketConfig& buckets);

/// Name -> value views of the two aggregations, for inspection and tests.
std::map<std::string, double> aggregate_traffic_named(
    const EntityWindowKey& key, const WindowConfig& window,
    std::span<const ConnRecord* const> group, Direction dir,
    const PortBucketConfig& buckets, const Cidr& internal_cidr);
std::map<std::string, double> aggregate_temporal_named(
    const EntityWindowKey& key, const WindowConfig& window,
    std::span<const ConnRecord* const> group, Direction dir,
    const PortBucketConfig& buckets);

/// Builds the full matrix for one scenario. Records outside
/// [t_start, t_end) or not involving an internal address are dropped.
/// Connection rows keep file order; aggregated rows are one per
/// (internal ip, window) with any traffic, ordered by (ip, window).
/// Aggregated kernels run in parallel over groups; each group is
/// computed serially in record order, so output is thread-count
/// independent.
FeatureMatrix featurize_dataset(std::span<const ConnRecord> records,
                                const ScenarioSpec& spec,
                                const FeaturizeConfig& cfg);

}  // namespace botflow
