#include "botflow/featurize.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace botflow {

namespace {

void validate_group(const EntityWindowKey& key, const WindowConfig& window,
                    std::span<const ConnRecord* const> group, Direction dir) {
  for (const ConnRecord* rec : group) {
    const IpAddr& endpoint = dir == Direction::outgoing ? rec->orig_h : rec->dest_h;
    if (endpoint != key.ip)
      throw std::logic_error("aggregate: record endpoint does not match group entity");
    if (assign_window(rec->ts, window) != key.window)
      throw std::logic_error("aggregate: record falls outside the group window");
  }
}

struct MinMaxSum {
  double sum = 0.0, min = 0.0, max = 0.0;
  bool any = false;
  void add(double v) {
    sum += v;
    if (!any) {
      min = max = v;
      any = true;
    } else {
      min = std::min(min, v);
      max = std::max(max, v);
    }
  }
};

}  // namespace

std::vector<double> featurize_connection(const ConnRecord& rec) {
  std::vector<double> v;
  v.reserve(8 + kProtoCount + kConnStateCount);
  v.push_back(rec.ts);
  v.push_back(rec.orig_p);
  v.push_back(rec.dest_p);
  v.push_back(rec.duration);
  v.push_back(static_cast<double>(rec.orig_bytes));
  v.push_back(static_cast<double>(rec.resp_bytes));
  v.push_back(static_cast<double>(rec.orig_pkts));
  v.push_back(static_cast<double>(rec.resp_pkts));
  for (int i = 0; i < kProtoCount; ++i)
    v.push_back(rec.proto == static_cast<Proto>(i) ? 1.0 : 0.0);
  for (int i = 0; i < kConnStateCount; ++i)
    v.push_back(rec.conn_state && *rec.conn_state == static_cast<ConnState>(i) ? 1.0 : 0.0);
  return v;
}

std::vector<double> aggregate_traffic(const EntityWindowKey& key,
                                      const WindowConfig& window,
                                      std::span<const ConnRecord* const> group,
                                      Direction dir,
                                      const PortBucketConfig& buckets,
                                      const Cidr& internal_cidr) {
  validate_group(key, window, group, dir);
  const std::size_t nb = buckets.bucket_count();
  const std::size_t stats_per_bucket = traffic_stat_names().size();

  std::vector<std::set<IpAddr>> ips(nb), subnets(nb);
  std::vector<MinMaxSum> dur(nb), ob(nb), rb(nb), op(nb), rp(nb);
  double proto_count[kProtoCount] = {0, 0, 0};
  std::set<std::uint16_t> src_ports, dest_ports;
  std::set<IpAddr> ext_dest_ips;

  for (const ConnRecord* rec : group) {
    std::size_t b = buckets.bucket_index(*rec);
    ips[b].insert(rec->dest_h);
    subnets[b].insert(rec->dest_h.subnet24());
    dur[b].add(rec->duration);
    ob[b].add(static_cast<double>(rec->orig_bytes));
    rb[b].add(static_cast<double>(rec->resp_bytes));
    op[b].add(static_cast<double>(rec->orig_pkts));
    rp[b].add(static_cast<double>(rec->resp_pkts));

    proto_count[static_cast<int>(rec->proto)] += 1.0;
    src_ports.insert(rec->orig_p);
    dest_ports.insert(rec->dest_p);
    if (!internal_cidr.contains(rec->dest_h)) ext_dest_ips.insert(rec->dest_h);
  }

  std::vector<double> out;
  out.reserve(nb * stats_per_bucket + traffic_global_stat_names().size());
  for (std::size_t b = 0; b < nb; ++b) {
    out.push_back(static_cast<double>(ips[b].size()));
    out.push_back(static_cast<double>(subnets[b].size()));
    for (const MinMaxSum* s : {&dur[b], &ob[b], &rb[b], &op[b], &rp[b]}) {
      out.push_back(s->sum);
      out.push_back(s->min);
      out.push_back(s->max);
    }
  }
  for (int i = 0; i < kProtoCount; ++i) out.push_back(proto_count[i]);
  out.push_back(static_cast<double>(src_ports.size()));
  out.push_back(static_cast<double>(ext_dest_ips.size()));
  out.push_back(static_cast<double>(dest_ports.size()));
  return out;
}

std::vector<double> aggregate_temporal(const EntityWindowKey& key,
                                       const WindowConfig& window,
                                       std::span<const ConnRecord* const> group,
                                       Direction dir,
                                       const PortBucketConfig& buckets) {
  validate_group(key, window, group, dir);
  const std::size_t nb = buckets.bucket_count();

  std::vector<std::vector<double>> times(nb);
  for (const ConnRecord* rec : group)
    times[buckets.bucket_index(*rec)].push_back(rec->ts);

  std::vector<double> out;
  out.reserve(nb * temporal_stat_names().size());
  std::vector<double> gaps;
  for (std::size_t b = 0; b < nb; ++b) {
    auto& ts = times[b];
    if (ts.size() < 2) {
      for (std::size_t k = 0; k < temporal_stat_names().size(); ++k) out.push_back(0.0);
      continue;
    }
    std::stable_sort(ts.begin(), ts.end());
    gaps.clear();
    for (std::size_t i = 1; i < ts.size(); ++i) gaps.push_back(ts[i] - ts[i - 1]);

    double mean = 0.0;
    for (double g : gaps) mean += g;
    mean /= static_cast<double>(gaps.size());
    double var = 0.0;
    for (double g : gaps) var += (g - mean) * (g - mean);
    var /= static_cast<double>(gaps.size());  // population variance

    std::vector<double> sorted = gaps;
    std::sort(sorted.begin(), sorted.end());
    double median = sorted.size() % 2 == 1
                        ? sorted[sorted.size() / 2]
                        : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);

    out.push_back(mean);
    out.push_back(std::sqrt(var));
    out.push_back(median);
    out.push_back(sorted.front());
    out.push_back(sorted.back());
  }
  return out;
}

namespace {

std::map<std::string, double> zip_names(const FeatureSchema& schema,
                                        std::size_t offset,
                                        const std::vector<double>& values) {
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < values.size(); ++i)
    out[schema.columns[offset + i].name] = values[i];
  return out;
}

}  // namespace

std::map<std::string, double> aggregate_traffic_named(
    const EntityWindowKey& key, const WindowConfig& window,
    std::span<const ConnRecord* const> group, Direction dir,
    const PortBucketConfig& buckets, const Cidr& internal_cidr) {
  FeatureSchema schema = traffic_schema(buckets);
  auto values = aggregate_traffic(key, window, group, dir, buckets, internal_cidr);
  std::size_t offset = dir == Direction::outgoing ? 0 : values.size();
  return zip_names(schema, offset, values);
}

std::map<std::string, double> aggregate_temporal_named(
    const EntityWindowKey& key, const WindowConfig& window,
    std::span<const ConnRecord* const> group, Direction dir,
    const PortBucketConfig& buckets) {
  FeatureSchema schema = temporal_schema(buckets);
  auto values = aggregate_temporal(key, window, group, dir, buckets);
  std::size_t offset = dir == Direction::outgoing ? 0 : values.size();
  return zip_names(schema, offset, values);
}

FeatureMatrix featurize_dataset(std::span<const ConnRecord> records,
                                const ScenarioSpec& spec,
                                const FeaturizeConfig& cfg) {
  if (cfg.regime == LabelRegime::fine && spec.victim_ips.empty())
    throw std::invalid_argument("fine labeling unavailable: manifest lists no victim_ips");
  cfg.buckets.validate();

  const WindowConfig window{cfg.window_len, spec.t_start};
  const Cidr& internal = spec.internal_cidr;

  std::vector<const ConnRecord*> kept;
  kept.reserve(records.size());
  for (const ConnRecord& rec : records) {
    if (rec.ts < spec.t_start || rec.ts >= spec.t_end) continue;
    if (!internal.contains(rec.orig_h) && !internal.contains(rec.dest_h)) continue;
    kept.push_back(&rec);
  }

  std::vector<Label> labels(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i)
    labels[i] = label_record(*kept[i], spec, cfg.regime, cfg.label_options);

  FeatureMatrix matrix(schema_for(cfg.representation, cfg.buckets));

  if (cfg.representation == Representation::connection) {
    matrix.resize_rows(kept.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < static_cast<long>(kept.size()); ++i) {
      const ConnRecord& rec = *kept[i];
      auto values = featurize_connection(rec);
      auto row = matrix.row(i);
      std::copy(values.begin(), values.end(), row.begin());
      RowKey& key = matrix.key(i);
      key.scenario = spec.scenario_id;
      key.entity = internal.contains(rec.orig_h) ? rec.orig_h : rec.dest_h;
      key.window = assign_window(rec.ts, window);
      matrix.label(i) = static_cast<int>(labels[i]);
    }
    return matrix;
  }

  struct Group {
    std::vector<const ConnRecord*> out;
    std::vector<const ConnRecord*> in;
    bool malicious = false;
  };
  std::map<std::pair<IpAddr, std::int64_t>, Group> groups;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const ConnRecord* rec = kept[i];
    std::int64_t w = assign_window(rec->ts, window);
    bool mal = labels[i] == Label::malicious;
    if (internal.contains(rec->orig_h)) {
      Group& g = groups[{rec->orig_h, w}];
      g.out.push_back(rec);
      g.malicious = g.malicious || mal;
    }
    if (internal.contains(rec->dest_h)) {
      Group& g = groups[{rec->dest_h, w}];
      g.in.push_back(rec);
      g.malicious = g.malicious || mal;
    }
  }

  std::vector<std::pair<const std::pair<IpAddr, std::int64_t>*, const Group*>> ordered;
  ordered.reserve(groups.size());
  for (const auto& [key, group] : groups) ordered.emplace_back(&key, &group);

  const bool temporal = cfg.representation == Representation::traffic_temporal;
  matrix.resize_rows(ordered.size());

#pragma omp parallel for schedule(dynamic, 16)
  for (long g = 0; g < static_cast<long>(ordered.size()); ++g) {
    const auto& [ip, w] = *ordered[g].first;
    const Group& group = *ordered[g].second;
    EntityWindowKey key{ip, w};

    auto row = matrix.row(g);
    std::size_t pos = 0;
    auto emit = [&](const std::vector<double>& values) {
      std::copy(values.begin(), values.end(), row.begin() + pos);
      pos += values.size();
    };
    emit(aggregate_traffic(key, window, group.out, Direction::outgoing, cfg.buckets, internal));
    emit(aggregate_traffic(key, window, group.in, Direction::incoming, cfg.buckets, internal));
    if (temporal) {
      emit(aggregate_temporal(key, window, group.out, Direction::outgoing, cfg.buckets));
      emit(aggregate_temporal(key, window, group.in, Direction::incoming, cfg.buckets));
    }

    RowKey& row_key = matrix.key(g);
    row_key.scenario = spec.scenario_id;
    row_key.entity = ip;
    row_key.window = w;
    matrix.label(g) = group.malicious ? 1 : 0;
  }
  return matrix;
}

}  // namespace botflow
