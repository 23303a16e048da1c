#include "botflow/schema.hpp"

#include <cstdio>
#include <stdexcept>

#include "botflow/conn_record.hpp"

namespace botflow {

std::optional<Representation> parse_representation(std::string_view text) {
  if (text == "connection") return Representation::connection;
  if (text == "traffic") return Representation::traffic;
  if (text == "traffic+temporal" || text == "traffic_temporal")
    return Representation::traffic_temporal;
  return std::nullopt;
}

std::string_view representation_name(Representation rep) {
  switch (rep) {
    case Representation::connection: return "connection";
    case Representation::traffic: return "traffic";
    case Representation::traffic_temporal: return "traffic+temporal";
  }
  return "";
}

std::vector<std::string> FeatureSchema::names() const {
  std::vector<std::string> out;
  out.reserve(columns.size());
  for (const auto& c : columns) out.push_back(c.name);
  return out;
}

std::string FeatureSchema::fingerprint() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](char c) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  };
  for (const auto& c : columns) {
    for (char ch : c.name) mix(ch);
    mix('\n');
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::size_t FeatureSchema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == name) return i;
  throw std::out_of_range("no such column: " + name);
}

const std::array<std::string_view, 17>& traffic_stat_names() {
  static const std::array<std::string_view, 17> names{
      "distinct_dest_ips", "distinct_dest_subnets24",
      "duration.sum",      "duration.min",      "duration.max",
      "orig_bytes.sum",    "orig_bytes.min",    "orig_bytes.max",
      "resp_bytes.sum",    "resp_bytes.min",    "resp_bytes.max",
      "orig_pkts.sum",     "orig_pkts.min",     "orig_pkts.max",
      "resp_pkts.sum",     "resp_pkts.min",     "resp_pkts.max"};
  return names;
}

const std::array<std::string_view, 6>& traffic_global_stat_names() {
  static const std::array<std::string_view, 6> names{
      "conn_count.tcp",       "conn_count.udp",    "conn_count.icmp",
      "distinct_src_ports",   "distinct_ext_dest_ips",
      "distinct_dest_ports"};
  return names;
}

const std::array<std::string_view, 5>& temporal_stat_names() {
  static const std::array<std::string_view, 5> names{
      "iat.mean", "iat.std", "iat.median", "iat.min", "iat.max"};
  return names;
}

FeatureSchema connection_schema() {
  FeatureSchema s;
  s.columns = {
      {"ts", "record timestamp, seconds"},
      {"orig_p", "originator port"},
      {"dest_p", "responder port"},
      {"duration", "connection duration, seconds"},
      {"orig_bytes", "bytes sent by originator"},
      {"resp_bytes", "bytes sent by responder"},
      {"orig_pkts", "packets sent by originator"},
      {"resp_pkts", "packets sent by responder"},
  };
  for (int i = 0; i < kProtoCount; ++i) {
    auto name = proto_name(static_cast<Proto>(i));
    s.columns.push_back({"proto." + std::string(name), "protocol one-hot"});
  }
  for (int i = 0; i < kConnStateCount; ++i) {
    auto name = conn_state_name(static_cast<ConnState>(i));
    s.columns.push_back({"state." + std::string(name), "conn_state one-hot"});
  }
  return s;
}

namespace {

const char* direction_prefix(bool outgoing) { return outgoing ? "out" : "in"; }

void append_traffic_block(FeatureSchema& s, const PortBucketConfig& cfg,
                          bool outgoing) {
  const char* dir = direction_prefix(outgoing);
  for (std::size_t b = 0; b < cfg.bucket_count(); ++b) {
    const std::string& bucket = cfg.bucket_name(b);
    for (auto stat : traffic_stat_names())
      s.columns.push_back({std::string(dir) + "." + bucket + "." + std::string(stat),
                           "per-bucket traffic statistic"});
  }
  for (auto stat : traffic_global_stat_names())
    s.columns.push_back({std::string(dir) + ".global." + std::string(stat),
                         "direction-level traffic statistic"});
}

void append_temporal_block(FeatureSchema& s, const PortBucketConfig& cfg,
                           bool outgoing) {
  const char* dir = direction_prefix(outgoing);
  for (std::size_t b = 0; b < cfg.bucket_count(); ++b) {
    const std::string& bucket = cfg.bucket_name(b);
    for (auto stat : temporal_stat_names())
      s.columns.push_back({std::string(dir) + "." + bucket + "." + std::string(stat),
                           "inter-arrival statistic"});
  }
}

}  // namespace

FeatureSchema traffic_schema(const PortBucketConfig& cfg) {
  FeatureSchema s;
  append_traffic_block(s, cfg, true);
  append_traffic_block(s, cfg, false);
  return s;
}

FeatureSchema temporal_schema(const PortBucketConfig& cfg) {
  FeatureSchema s;
  append_temporal_block(s, cfg, true);
  append_temporal_block(s, cfg, false);
  return s;
}

FeatureSchema schema_for(Representation rep, const PortBucketConfig& cfg) {
  switch (rep) {
    case Representation::connection:
      return connection_schema();
    case Representation::traffic:
      return traffic_schema(cfg);
    case Representation::traffic_temporal: {
      FeatureSchema s = traffic_schema(cfg);
      FeatureSchema t = temporal_schema(cfg);
      s.columns.insert(s.columns.end(), t.columns.begin(), t.columns.end());
      return s;
    }
  }
  throw std::logic_error("unknown representation");
}

}  // namespace botflow
