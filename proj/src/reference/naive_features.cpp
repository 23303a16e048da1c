#include "botflow/reference/naive_features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace botflow::reference {

using namespace botflow;

namespace {

// Everything below recomputes from first principles: window indices by
// explicit floor, bucket membership by scanning the bucket table, each
// statistic with its own filtering pass.

std::int64_t naive_window(double ts, double t0, double T) {
  return static_cast<std::int64_t>(std::floor((ts - t0) / T));
}

bool in_cidr(const IpAddr& ip, const Cidr& cidr) { return cidr.contains(ip); }

std::size_t naive_bucket(const ConnRecord& rec, const PortBucketConfig& cfg) {
  std::uint16_t port = rec.proto == Proto::icmp ? rec.orig_p : rec.dest_p;
  for (std::size_t i = 0; i < cfg.buckets.size(); ++i) {
    const PortBucket& b = cfg.buckets[i];
    if (rec.proto == Proto::icmp) {
      if (b.icmp_type.has_value() && *b.icmp_type == port) return i;
    } else {
      if (std::find(b.ports.begin(), b.ports.end(), port) != b.ports.end()) return i;
    }
  }
  return cfg.buckets.size();
}

bool record_matches(const ConnRecord& rec, const IpAddr& entity, bool outgoing) {
  return outgoing ? rec.orig_h == entity : rec.dest_h == entity;
}

struct NaiveScenario {
  const ScenarioSpec& spec;
  const FeaturizeConfig& cfg;
  std::vector<const ConnRecord*> kept;
};

bool naive_malicious(const ConnRecord& rec, const ScenarioSpec& spec,
                     const FeaturizeConfig& cfg) {
  if (cfg.regime == LabelRegime::coarse) {
    if (spec.botnet_ips.count(rec.orig_h)) return true;
    if (!cfg.label_options.coarse_origin_only && spec.botnet_ips.count(rec.dest_h))
      return true;
    return false;
  }
  return spec.botnet_ips.count(rec.orig_h) > 0 && spec.victim_ips.count(rec.dest_h) > 0;
}

// Filters the full record list down to one (entity, window, direction,
// bucket) cell.
std::vector<const ConnRecord*> filter_cell(const NaiveScenario& sc,
                                           const IpAddr& entity, std::int64_t w,
                                           bool outgoing, std::size_t bucket) {
  std::vector<const ConnRecord*> out;
  for (const ConnRecord* rec : sc.kept) {
    if (!record_matches(*rec, entity, outgoing)) continue;
    if (naive_window(rec->ts, sc.spec.t_start, sc.cfg.window_len) != w) continue;
    if (naive_bucket(*rec, sc.cfg.buckets) != bucket) continue;
    out.push_back(rec);
  }
  return out;
}

std::vector<const ConnRecord*> filter_direction(const NaiveScenario& sc,
                                                const IpAddr& entity,
                                                std::int64_t w, bool outgoing) {
  std::vector<const ConnRecord*> out;
  for (const ConnRecord* rec : sc.kept) {
    if (!record_matches(*rec, entity, outgoing)) continue;
    if (naive_window(rec->ts, sc.spec.t_start, sc.cfg.window_len) != w) continue;
    out.push_back(rec);
  }
  return out;
}

double naive_sum(const std::vector<const ConnRecord*>& cell, double (*get)(const ConnRecord&)) {
  double s = 0;
  for (auto* r : cell) s += get(*r);
  return s;
}

double naive_min(const std::vector<const ConnRecord*>& cell, double (*get)(const ConnRecord&)) {
  if (cell.empty()) return 0.0;
  double m = get(*cell.front());
  for (auto* r : cell) m = std::min(m, get(*r));
  return m;
}

double naive_max(const std::vector<const ConnRecord*>& cell, double (*get)(const ConnRecord&)) {
  if (cell.empty()) return 0.0;
  double m = get(*cell.front());
  for (auto* r : cell) m = std::max(m, get(*r));
  return m;
}

double get_duration(const ConnRecord& r) { return r.duration; }
double get_orig_bytes(const ConnRecord& r) { return static_cast<double>(r.orig_bytes); }
double get_resp_bytes(const ConnRecord& r) { return static_cast<double>(r.resp_bytes); }
double get_orig_pkts(const ConnRecord& r) { return static_cast<double>(r.orig_pkts); }
double get_resp_pkts(const ConnRecord& r) { return static_cast<double>(r.resp_pkts); }

void fill_traffic_cell(std::map<std::string, double>& row, const std::string& prefix,
                       const std::vector<const ConnRecord*>& cell) {
  std::set<IpAddr> ips;
  for (auto* r : cell) ips.insert(r->dest_h);
  row[prefix + ".distinct_dest_ips"] = static_cast<double>(ips.size());

  std::set<IpAddr> subnets;
  for (auto* r : cell) subnets.insert(r->dest_h.subnet24());
  row[prefix + ".distinct_dest_subnets24"] = static_cast<double>(subnets.size());

  const std::pair<const char*, double (*)(const ConnRecord&)> fields[] = {
      {"duration", get_duration},   {"orig_bytes", get_orig_bytes},
      {"resp_bytes", get_resp_bytes}, {"orig_pkts", get_orig_pkts},
      {"resp_pkts", get_resp_pkts}};
  for (auto [name, get] : fields) {
    row[prefix + "." + name + ".sum"] = naive_sum(cell, get);
    row[prefix + "." + name + ".min"] = naive_min(cell, get);
    row[prefix + "." + name + ".max"] = naive_max(cell, get);
  }
}

void fill_global(std::map<std::string, double>& row, const std::string& prefix,
                 const std::vector<const ConnRecord*>& recs, const Cidr& internal) {
  double tcp = 0, udp = 0, icmp = 0;
  for (auto* r : recs) {
    if (r->proto == Proto::tcp) tcp += 1;
    if (r->proto == Proto::udp) udp += 1;
    if (r->proto == Proto::icmp) icmp += 1;
  }
  row[prefix + ".conn_count.tcp"] = tcp;
  row[prefix + ".conn_count.udp"] = udp;
  row[prefix + ".conn_count.icmp"] = icmp;

  std::set<std::uint16_t> sp;
  for (auto* r : recs) sp.insert(r->orig_p);
  row[prefix + ".distinct_src_ports"] = static_cast<double>(sp.size());

  std::set<IpAddr> ext;
  for (auto* r : recs)
    if (!in_cidr(r->dest_h, internal)) ext.insert(r->dest_h);
  row[prefix + ".distinct_ext_dest_ips"] = static_cast<double>(ext.size());

  std::set<std::uint16_t> dp;
  for (auto* r : recs) dp.insert(r->dest_p);
  row[prefix + ".distinct_dest_ports"] = static_cast<double>(dp.size());
}

void fill_temporal_cell(std::map<std::string, double>& row, const std::string& prefix,
                        const std::vector<const ConnRecord*>& cell) {
  auto zero = [&] {
    for (const char* s : {".iat.mean", ".iat.std", ".iat.median", ".iat.min", ".iat.max"})
      row[prefix + s] = 0.0;
  };
  if (cell.size() < 2) {
    zero();
    return;
  }
  std::vector<double> ts;
  for (auto* r : cell) ts.push_back(r->ts);
  std::stable_sort(ts.begin(), ts.end());
  std::vector<double> gaps;
  for (std::size_t i = 1; i < ts.size(); ++i) gaps.push_back(ts[i] - ts[i - 1]);

  double mean = 0;
  for (double g : gaps) mean += g;
  mean /= static_cast<double>(gaps.size());
  double var = 0;
  for (double g : gaps) var += (g - mean) * (g - mean);
  var /= static_cast<double>(gaps.size());
  std::vector<double> sorted = gaps;
  std::sort(sorted.begin(), sorted.end());
  double median = sorted.size() % 2 == 1
                      ? sorted[sorted.size() / 2]
                      : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
  row[prefix + ".iat.mean"] = mean;
  row[prefix + ".iat.std"] = std::sqrt(var);
  row[prefix + ".iat.median"] = median;
  row[prefix + ".iat.min"] = sorted.front();
  row[prefix + ".iat.max"] = sorted.back();
}

std::vector<double> naive_connection_row(const ConnRecord& rec) {
  std::vector<double> v;
  v.push_back(rec.ts);
  v.push_back(rec.orig_p);
  v.push_back(rec.dest_p);
  v.push_back(rec.duration);
  v.push_back(static_cast<double>(rec.orig_bytes));
  v.push_back(static_cast<double>(rec.resp_bytes));
  v.push_back(static_cast<double>(rec.orig_pkts));
  v.push_back(static_cast<double>(rec.resp_pkts));
  v.push_back(rec.proto == Proto::tcp ? 1.0 : 0.0);
  v.push_back(rec.proto == Proto::udp ? 1.0 : 0.0);
  v.push_back(rec.proto == Proto::icmp ? 1.0 : 0.0);
  for (int s = 0; s < kConnStateCount; ++s)
    v.push_back(rec.conn_state.has_value() &&
                        static_cast<int>(*rec.conn_state) == s
                    ? 1.0
                    : 0.0);
  return v;
}

}  // namespace

FeatureMatrix featurize_dataset_naive(std::span<const ConnRecord> records,
                                      const ScenarioSpec& spec,
                                      const FeaturizeConfig& cfg) {
  if (cfg.regime == LabelRegime::fine && spec.victim_ips.empty())
    throw std::invalid_argument("fine labeling unavailable: manifest lists no victim_ips");

  NaiveScenario sc{spec, cfg, {}};
  for (const ConnRecord& rec : records) {
    if (rec.ts < spec.t_start || rec.ts >= spec.t_end) continue;
    if (!in_cidr(rec.orig_h, spec.internal_cidr) && !in_cidr(rec.dest_h, spec.internal_cidr))
      continue;
    sc.kept.push_back(&rec);
  }

  FeatureMatrix matrix(schema_for(cfg.representation, cfg.buckets));

  if (cfg.representation == Representation::connection) {
    for (const ConnRecord* rec : sc.kept) {
      RowKey key;
      key.scenario = spec.scenario_id;
      key.entity = in_cidr(rec->orig_h, spec.internal_cidr) ? rec->orig_h : rec->dest_h;
      key.window = naive_window(rec->ts, spec.t_start, cfg.window_len);
      matrix.add_row(std::move(key), naive_connection_row(*rec),
                     naive_malicious(*rec, spec, cfg) ? 1 : 0);
    }
    return matrix;
  }

  // candidate (entity, window) pairs, sorted
  std::set<std::pair<IpAddr, std::int64_t>> pairs;
  for (const ConnRecord* rec : sc.kept) {
    std::int64_t w = naive_window(rec->ts, spec.t_start, cfg.window_len);
    if (in_cidr(rec->orig_h, spec.internal_cidr)) pairs.insert({rec->orig_h, w});
    if (in_cidr(rec->dest_h, spec.internal_cidr)) pairs.insert({rec->dest_h, w});
  }

  const auto names = matrix.schema().names();
  for (const auto& [entity, w] : pairs) {
    std::map<std::string, double> row;
    for (bool outgoing : {true, false}) {
      std::string dir = outgoing ? "out" : "in";
      for (std::size_t b = 0; b < cfg.buckets.bucket_count(); ++b) {
        std::string prefix = dir + "." + cfg.buckets.bucket_name(b);
        fill_traffic_cell(row, prefix, filter_cell(sc, entity, w, outgoing, b));
        if (cfg.representation == Representation::traffic_temporal)
          fill_temporal_cell(row, prefix, filter_cell(sc, entity, w, outgoing, b));
      }
      fill_global(row, dir + ".global", filter_direction(sc, entity, w, outgoing),
                  spec.internal_cidr);
    }

    std::vector<double> values;
    values.reserve(names.size());
    for (const auto& name : names) values.push_back(row.at(name));

    bool malicious = false;
    for (const ConnRecord* rec : sc.kept) {
      if (naive_window(rec->ts, spec.t_start, cfg.window_len) != w) continue;
      if (rec->orig_h != entity && rec->dest_h != entity) continue;
      if (naive_malicious(*rec, spec, cfg)) {
        malicious = true;
        break;
      }
    }
    matrix.add_row(RowKey{spec.scenario_id, entity, w}, values, malicious ? 1 : 0);
  }
  return matrix;
}

}  // namespace botflow::reference
