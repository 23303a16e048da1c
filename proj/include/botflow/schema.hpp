#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "botflow/port_buckets.hpp"

namespace botflow {

enum class Representation { connection, traffic, traffic_temporal };

std::optional<Representation> parse_representation(std::string_view text);
std::string_view representation_name(Representation rep);

struct Column {
  std::string name;
  std::string description;
};

/// Ordered column schema. Identity (and the fingerprint) is defined by
/// the names alone, never by data.
struct FeatureSchema {
  std::vector<Column> columns;

  std::size_t size() const { return columns.size(); }
  std::vector<std::string> names() const;
  /// fnv1a-64 over the column names, as 16 hex digits.
  std::string fingerprint() const;
  std::size_t index_of(const std::string& name) const;  // throws if absent
};

/// Per-bucket traffic statistics in column order (17 of them).
const std::array<std::string_view, 17>& traffic_stat_names();
/// Direction-level traffic statistics in column order (6 of them).
const std::array<std::string_view, 6>& traffic_global_stat_names();
/// Inter-arrival statistics in column order (5 of them).
const std::array<std::string_view, 5>& temporal_stat_names();

/// 24 columns: 8 numeric conn.log fields, 3-way proto one-hot, 13-way
/// conn_state one-hot.
FeatureSchema connection_schema();
/// Per direction: per-bucket block then the global block.
FeatureSchema traffic_schema(const PortBucketConfig& cfg);
FeatureSchema temporal_schema(const PortBucketConfig& cfg);
FeatureSchema schema_for(Representation rep, const PortBucketConfig& cfg);

}  // namespace botflow
