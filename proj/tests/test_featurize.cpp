#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <optional>
#include <set>
#include <sstream>

#include "botflow/featurize.hpp"
#include "botflow/reference/naive_features.hpp"
#include "test_support.hpp"

using namespace botflow;
using test_support::ipv4;
using test_support::Rng;

namespace {

ConnRecord make_record(double ts, IpAddr orig, IpAddr dest, Proto proto,
                       std::uint16_t dest_p, std::uint64_t orig_bytes = 100) {
  ConnRecord r;
  r.ts = ts;
  r.orig_h = orig;
  r.dest_h = dest;
  r.orig_p = 1025;
  r.dest_p = dest_p;
  r.proto = proto;
  r.duration = 1.0;
  r.orig_bytes = orig_bytes;
  r.resp_bytes = 50;
  r.orig_pkts = 3;
  r.resp_pkts = 2;
  r.conn_state = ConnState::SF;
  return r;
}

std::vector<const ConnRecord*> ptrs(const std::vector<ConnRecord>& v) {
  std::vector<const ConnRecord*> out;
  for (const auto& r : v) out.push_back(&r);
  return out;
}

const Cidr kInternal = *Cidr::parse("10.9.0.0/16");

}  // namespace

TEST_CASE("assign_window") {
  WindowConfig cfg{30.0, 0.0};
  CHECK(assign_window(65.2, cfg) == 2);
  CHECK(assign_window(0.0, cfg) == 0);
  CHECK(assign_window(90.0, cfg) == 3);
  CHECK_THROWS_AS(assign_window(-1.0, cfg), std::domain_error);
  CHECK_THROWS_AS(assign_window(1.0, WindowConfig{0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("bucket_port") {
  const auto& cfg = PortBucketConfig::defaults();
  CHECK(bucket_port(Proto::tcp, 25, cfg) == "smtp-25");
  CHECK(bucket_port(Proto::udp, 161, cfg) == "snmp-161");
  CHECK(bucket_port(Proto::tcp, 49152, cfg) == "Other");
  CHECK(bucket_port(Proto::icmp, 8, cfg) == "icmp-8");
  CHECK(bucket_port(Proto::icmp, 3, cfg) == "icmp-3");
  CHECK(bucket_port(Proto::icmp, 0, cfg) == "Other");
  // udp mirrors the tcp bucket names by port
  CHECK(bucket_port(Proto::udp, 25, cfg) == "smtp-25");
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("bucket config rejects overlaps") {
  PortBucketConfig cfg;
  cfg.buckets.push_back({"a-1", {25}, std::nullopt});
  cfg.buckets.push_back({"b-2", {25}, std::nullopt});
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("connection vector layout") {
  auto schema = connection_schema();
  CHECK(schema.size() == 24);

  auto rec = make_record(10.0, ipv4(10, 9, 0, 3), ipv4(77, 1, 1, 1), Proto::tcp, 80);
  auto v = featurize_connection(rec);
  REQUIRE(v.size() == 24);

  // proto one-hot: tcp set, udp and icmp clear
  CHECK(v[schema.index_of("proto.tcp")] == 1.0);
  CHECK(v[schema.index_of("proto.udp")] == 0.0);
  CHECK(v[schema.index_of("proto.icmp")] == 0.0);

  // exactly one of the 13 state columns set
  int set_states = 0;
  for (int i = 0; i < kConnStateCount; ++i) {
    auto name = "state." + std::string(conn_state_name(static_cast<ConnState>(i)));
    set_states += v[schema.index_of(name)] == 1.0;
  }
  CHECK(set_states == 1);
  CHECK(v[schema.index_of("state.SF")] == 1.0);

  // two records differing only in orig_bytes differ in exactly one column
  auto rec2 = rec;
  rec2.orig_bytes += 5;
  auto v2 = featurize_connection(rec2);
  int diffs = 0;
  for (std::size_t i = 0; i < v.size(); ++i) diffs += v[i] != v2[i];
  CHECK(diffs == 1);

  // a missing conn_state leaves all 13 state columns at zero
  auto rec3 = rec;
  rec3.conn_state.reset();
  auto v3 = featurize_connection(rec3);
  double state_sum = 0;
  for (int i = 0; i < kConnStateCount; ++i)
    state_sum += v3[8 + kProtoCount + i];
  CHECK(state_sum == 0.0);
}

TEST_CASE("aggregate_traffic sums, mins, maxes") {
  IpAddr me = ipv4(10, 9, 0, 3);
  std::vector<ConnRecord> recs{
      make_record(1.0, me, ipv4(77, 1, 1, 1), Proto::tcp, 25, 100),
      make_record(2.0, me, ipv4(77, 1, 1, 2), Proto::tcp, 25, 200),
      make_record(3.0, me, ipv4(77, 1, 1, 3), Proto::tcp, 25, 300),
  };
  auto named = aggregate_traffic_named({me, 0}, WindowConfig{30, 0}, ptrs(recs),
                                       Direction::outgoing,
                                       PortBucketConfig::defaults(), kInternal);
  CHECK(named.at("out.smtp-25.orig_bytes.sum") == 600.0);
  CHECK(named.at("out.smtp-25.orig_bytes.min") == 100.0);
  CHECK(named.at("out.smtp-25.orig_bytes.max") == 300.0);
  CHECK(named.at("out.smtp-25.distinct_dest_ips") == 3.0);
  CHECK(named.at("out.http-80.orig_bytes.sum") == 0.0);
  CHECK(named.at("out.global.conn_count.tcp") == 3.0);
  CHECK(named.at("out.global.distinct_ext_dest_ips") == 3.0);
}

TEST_CASE("distinct subnets group by /24") {
  IpAddr me = ipv4(10, 9, 0, 3);
  std::vector<ConnRecord> recs{
      make_record(1.0, me, ipv4(10, 1, 2, 4), Proto::tcp, 80),
      make_record(2.0, me, ipv4(10, 1, 2, 9), Proto::tcp, 80),
      make_record(3.0, me, ipv4(10, 1, 3, 1), Proto::tcp, 80),
  };
  auto named = aggregate_traffic_named({me, 0}, WindowConfig{30, 0}, ptrs(recs),
                                       Direction::outgoing,
                                       PortBucketConfig::defaults(), kInternal);
  CHECK(named.at("out.http-80.distinct_dest_ips") == 3.0);
  CHECK(named.at("out.http-80.distinct_dest_subnets24") == 2.0);
}

TEST_CASE("empty group emits zeros") {
  IpAddr me = ipv4(10, 9, 0, 3);
  auto values = aggregate_traffic({me, 0}, WindowConfig{30, 0}, {},
                                  Direction::incoming,
                                  PortBucketConfig::defaults(), kInternal);
  for (double v : values) CHECK(v == 0.0);
}

TEST_CASE("mismatched group key throws") {
  IpAddr me = ipv4(10, 9, 0, 3);
  std::vector<ConnRecord> recs{
      make_record(1.0, ipv4(10, 9, 0, 4), ipv4(77, 1, 1, 1), Proto::tcp, 25)};
  CHECK_THROWS_AS(aggregate_traffic({me, 0}, WindowConfig{30, 0}, ptrs(recs),
                                    Direction::outgoing,
                                    PortBucketConfig::defaults(), kInternal),
                  std::logic_error);
  // wrong window
  CHECK_THROWS_AS(aggregate_traffic({ipv4(10, 9, 0, 4), 5}, WindowConfig{30, 0},
                                    ptrs(recs), Direction::outgoing,
                                    PortBucketConfig::defaults(), kInternal),
                  std::logic_error);
}

TEST_CASE("inter-arrival statistics") {
  IpAddr me = ipv4(10, 9, 0, 3);
  WindowConfig w{30, 0};

  SUBCASE("gaps 1,2,3") {
    std::vector<ConnRecord> recs{
        make_record(0.0, me, ipv4(77, 1, 1, 1), Proto::tcp, 25),
        make_record(1.0, me, ipv4(77, 1, 1, 1), Proto::tcp, 25),
        make_record(3.0, me, ipv4(77, 1, 1, 1), Proto::tcp, 25),
        make_record(6.0, me, ipv4(77, 1, 1, 1), Proto::tcp, 25),
    };
    auto named = aggregate_temporal_named({me, 0}, w, ptrs(recs),
                                          Direction::outgoing,
                                          PortBucketConfig::defaults());
    CHECK(named.at("out.smtp-25.iat.mean") == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(named.at("out.smtp-25.iat.median") == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(named.at("out.smtp-25.iat.min") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(named.at("out.smtp-25.iat.max") == doctest::Approx(3.0).epsilon(1e-12));
    // population std of {1,2,3} = sqrt(((1-2)^2 + 0 + (3-2)^2) / 3)
    CHECK(named.at("out.smtp-25.iat.std") ==
          doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
  }

  SUBCASE("single record gives all zeros") {
    std::vector<ConnRecord> recs{
        make_record(5.0, me, ipv4(77, 1, 1, 1), Proto::tcp, 25)};
    auto named = aggregate_temporal_named({me, 0}, w, ptrs(recs),
                                          Direction::outgoing,
                                          PortBucketConfig::defaults());
    CHECK(named.at("out.smtp-25.iat.mean") == 0.0);
    CHECK(named.at("out.smtp-25.iat.std") == 0.0);
    CHECK(named.at("out.smtp-25.iat.max") == 0.0);
  }

  SUBCASE("one gap") {
    std::vector<ConnRecord> recs{
        make_record(0.0, me, ipv4(77, 1, 1, 1), Proto::tcp, 25),
        make_record(5.0, me, ipv4(77, 1, 1, 1), Proto::tcp, 25)};
    auto named = aggregate_temporal_named({me, 0}, w, ptrs(recs),
                                          Direction::outgoing,
                                          PortBucketConfig::defaults());
    CHECK(named.at("out.smtp-25.iat.mean") == 5.0);
    CHECK(named.at("out.smtp-25.iat.median") == 5.0);
    CHECK(named.at("out.smtp-25.iat.min") == 5.0);
    CHECK(named.at("out.smtp-25.iat.max") == 5.0);
    CHECK(named.at("out.smtp-25.iat.std") == 0.0);
  }
}

TEST_CASE("schema depends on config only") {
  const auto& buckets = PortBucketConfig::defaults();
  auto a = schema_for(Representation::traffic, buckets);
  auto b = schema_for(Representation::traffic, buckets);
  CHECK(a.names() == b.names());
  CHECK(a.fingerprint() == b.fingerprint());

  auto conn = schema_for(Representation::connection, buckets);
  CHECK(conn.size() == 24);

  // 21 buckets x 17 stats + 6 globals, both directions
  std::size_t nb = buckets.bucket_count();
  CHECK(a.size() == 2 * (nb * 17 + 6));
  auto tt = schema_for(Representation::traffic_temporal, buckets);
  CHECK(tt.size() == a.size() + 2 * nb * 5);
}

TEST_CASE("featurize_dataset row-count laws") {
  Rng rng(77);
  auto records = test_support::random_records(rng, 400, 1000.0, 240.0);
  auto spec = test_support::random_scenario_spec(1000.0, 240.0);
  FeaturizeConfig cfg;
  cfg.window_len = 30.0;

  SUBCASE("connection rows = internal-involving records") {
    cfg.representation = Representation::connection;
    auto m = featurize_dataset(records, spec, cfg);
    std::size_t expect = 0;
    for (const auto& r : records)
      expect += spec.internal_cidr.contains(r.orig_h) ||
                spec.internal_cidr.contains(r.dest_h);
    CHECK(m.rows() == expect);
  }

  SUBCASE("aggregated rows = distinct (internal ip, window) pairs") {
    cfg.representation = Representation::traffic;
    auto m = featurize_dataset(records, spec, cfg);
    std::set<std::pair<IpAddr, std::int64_t>> pairs;
    for (const auto& r : records) {
      auto w = static_cast<std::int64_t>(std::floor((r.ts - spec.t_start) / 30.0));
      if (spec.internal_cidr.contains(r.orig_h)) pairs.insert({r.orig_h, w});
      if (spec.internal_cidr.contains(r.dest_h)) pairs.insert({r.dest_h, w});
    }
    CHECK(m.rows() == pairs.size());
    // canonical (ip, window) row order
    for (std::size_t i = 1; i < m.rows(); ++i) {
      const auto& a = m.keys()[i - 1];
      const auto& b = m.keys()[i];
      CHECK(std::pair{a.entity, a.window} < std::pair{b.entity, b.window});
    }
  }
}

TEST_CASE("featurize_dataset matches the naive oracle") {
  FeaturizeConfig cfg;
  cfg.window_len = 30.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    std::size_t n = 40 + rng.below(360);
    auto records = test_support::random_records(rng, n, 500.0, 300.0);
    auto spec = test_support::random_scenario_spec(500.0, 300.0);
    for (auto rep : {Representation::connection, Representation::traffic,
                     Representation::traffic_temporal}) {
      cfg.representation = rep;
      auto fast = featurize_dataset(records, spec, cfg);
      auto naive = reference::featurize_dataset_naive(records, spec, cfg);
      auto msg = test_support::compare_matrices(fast, naive);
      INFO("seed ", seed, " rep ", representation_name(rep), ": ", msg);
      CHECK(msg.empty());
    }
  }
}

TEST_CASE("sum features are additive over record partitions") {
  Rng rng(99);
  auto records = test_support::random_records(rng, 300, 0.0, 120.0);
  auto spec = test_support::random_scenario_spec(0.0, 120.0);
  FeaturizeConfig cfg;
  cfg.representation = Representation::traffic;
  cfg.window_len = 1e6;  // a single window keeps groups whole

  // split records arbitrarily in two and compare per-entity sums
  std::vector<ConnRecord> half_a, half_b;
  for (std::size_t i = 0; i < records.size(); ++i)
    (i % 3 == 0 ? half_a : half_b).push_back(records[i]);

  auto whole = featurize_dataset(records, spec, cfg);
  auto part_a = featurize_dataset(half_a, spec, cfg);
  auto part_b = featurize_dataset(half_b, spec, cfg);

  auto names = whole.schema().names();
  auto row_by_key = [&](const FeatureMatrix& m, const RowKey& key) {
    for (std::size_t i = 0; i < m.rows(); ++i)
      if (m.keys()[i] == key) return std::optional<std::size_t>(i);
    return std::optional<std::size_t>();
  };
  std::size_t checked = 0;
  for (std::size_t i = 0; i < whole.rows(); ++i) {
    auto ia = row_by_key(part_a, whole.keys()[i]);
    auto ib = row_by_key(part_b, whole.keys()[i]);
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (names[j].find(".sum") == std::string::npos &&
          names[j].find("conn_count") == std::string::npos)
        continue;
      double sum = (ia ? part_a.row(*ia)[j] : 0.0) + (ib ? part_b.row(*ib)[j] : 0.0);
      double tol = 1e-9 * std::max(1.0, std::fabs(sum));
      CHECK(std::fabs(whole.row(i)[j] - sum) <= tol);
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("featurize_dataset is deterministic and finite") {
  Rng rng(123);
  auto records = test_support::random_records(rng, 500, 0.0, 300.0);
  auto spec = test_support::random_scenario_spec(0.0, 300.0);
  FeaturizeConfig cfg;
  cfg.representation = Representation::traffic_temporal;

  auto a = featurize_dataset(records, spec, cfg);
  auto b = featurize_dataset(records, spec, cfg);
  CHECK(a.to_csv() == b.to_csv());
  CHECK_NOTHROW(a.validate_finite());
}

TEST_CASE("empty record set keeps the full schema") {
  auto spec = test_support::random_scenario_spec(0.0, 100.0);
  FeaturizeConfig cfg;
  auto m = featurize_dataset({}, spec, cfg);
  CHECK(m.rows() == 0);
  CHECK(m.cols() == schema_for(cfg.representation, cfg.buckets).size());
}

TEST_CASE("feature csv round-trips") {
  Rng rng(5);
  auto records = test_support::random_records(rng, 120, 0.0, 120.0);
  auto spec = test_support::random_scenario_spec(0.0, 120.0);
  FeaturizeConfig cfg;
  cfg.representation = Representation::traffic;
  auto m = featurize_dataset(records, spec, cfg);

  std::string csv = m.to_csv("{\"note\":\"test\"}");
  std::istringstream in(csv);
  auto m2 = FeatureMatrix::read_csv(in);
  CHECK(m2.rows() == m.rows());
  CHECK(m2.schema().names() == m.schema().names());
  CHECK(m2.to_csv() == m.to_csv());
}
