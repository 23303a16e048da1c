#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "botflow/conn_log.hpp"
#include "botflow/scenario_spec.hpp"

using namespace botflow;

namespace {

const char* kHeader13 =
    "#fields\tts\tuid\tid.orig_h\tid.orig_p\tid.resp_h\tid.resp_p\tproto\t"
    "duration\torig_bytes\tresp_bytes\torig_pkts\tresp_pkts\tconn_state\n";

ConnLog parse(const std::string& text) {
  std::istringstream in(text);
  return parse_conn_log(in);
}

std::string sample_manifest() {
  return "scenario_id = neris-1\n"
         "attack_name = spam, click fraud\n"
         "botnet_ips = 147.32.84.165\n"
         "internal_cidr = 147.32.0.0/16\n"
         "t_start = 1313367235\n"
         "t_end = 1313397235\n";
}

}  // namespace

TEST_CASE("ip parsing and subnets") {
  auto ip = IpAddr::parse("147.32.84.165");
  REQUIRE(ip.has_value());
  CHECK(ip->str() == "147.32.84.165");
  CHECK(ip->subnet24().str() == "147.32.84.0");
  CHECK(IpAddr::parse("fe80::219:e3ff:fee7:5d23").has_value());
  CHECK_FALSE(IpAddr::parse("not-an-ip").has_value());
  CHECK_FALSE(IpAddr::parse("300.1.2.3").has_value());

  auto cidr = Cidr::parse("147.32.0.0/16");
  REQUIRE(cidr.has_value());
  CHECK(cidr->contains(*ip));
  CHECK_FALSE(cidr->contains(*IpAddr::parse("10.0.0.1")));
  CHECK_FALSE(Cidr::parse("147.32.0.0/40").has_value());
  CHECK_FALSE(Cidr::parse("147.32.0.0").has_value());
}

TEST_CASE("direct field mapping") {
  std::string line =
      "1313389279.1\tC1\t147.32.84.165\t1025\t77.75.73.9\t25\ttcp\t2.5\t1024\t"
      "512\t10\t8\tSF\n";
  auto log = parse(kHeader13 + line);
  REQUIRE(log.records.size() == 1);
  const ConnRecord& r = log.records[0];
  CHECK(r.ts == doctest::Approx(1313389279.1).epsilon(1e-12));
  CHECK(r.orig_h.str() == "147.32.84.165");
  CHECK(r.orig_p == 1025);
  CHECK(r.dest_h.str() == "77.75.73.9");
  CHECK(r.dest_p == 25);
  CHECK(r.proto == Proto::tcp);
  CHECK(r.duration == 2.5);
  CHECK(r.orig_bytes == 1024);
  CHECK(r.resp_bytes == 512);
  CHECK(r.orig_pkts == 10);
  CHECK(r.resp_pkts == 8);
  CHECK(r.conn_state == ConnState::SF);
  CHECK_FALSE(r.missing_duration);
  // uid is not a record field; it lands in the ignored-column list
  REQUIRE(log.stats.ignored_columns.size() == 1);
  CHECK(log.stats.ignored_columns[0] == "uid");
}

TEST_CASE("missing duration normalizes to zero with a flag") {
  std::string line =
      "1313389279.1\tC1\t147.32.84.165\t1025\t77.75.73.9\t25\ttcp\t-\t1024\t"
      "512\t10\t8\tSF\n";
  auto log = parse(kHeader13 + line);
  REQUIRE(log.records.size() == 1);
  CHECK(log.records[0].duration == 0.0);
  CHECK(log.records[0].missing_duration);
}

TEST_CASE("permuted header binds by name") {
  std::string direct =
      std::string(kHeader13) +
      "100.5\tC1\t10.0.0.1\t1025\t10.0.0.2\t80\ttcp\t1.5\t10\t20\t1\t2\tS0\n";
  std::string permuted =
      "#fields\tproto\tts\tid.resp_p\tid.resp_h\tid.orig_p\tid.orig_h\t"
      "conn_state\tduration\torig_bytes\tresp_bytes\torig_pkts\tresp_pkts\n"
      "tcp\t100.5\t80\t10.0.0.2\t1025\t10.0.0.1\tS0\t1.5\t10\t20\t1\t2\n";
  auto a = parse(direct);
  auto b = parse(permuted);
  REQUIRE(a.records.size() == 1);
  REQUIRE(b.records.size() == 1);
  CHECK(a.records[0] == b.records[0]);
}

TEST_CASE("paper-style destination aliases are accepted") {
  std::string text =
      "#fields\tts\tid.orig_h\tid.orig_p\tid.dest_h\tid.dest_p\tproto\n"
      "5.0\t10.0.0.1\t1\t10.0.0.2\t2\tudp\n";
  auto log = parse(text);
  REQUIRE(log.records.size() == 1);
  CHECK(log.records[0].dest_h.str() == "10.0.0.2");
  CHECK(log.records[0].dest_p == 2);
  CHECK(log.records[0].missing_duration);  // column absent entirely
}

TEST_CASE("parse errors carry line numbers") {
  SUBCASE("wrong column count") {
    std::string text = std::string(kHeader13) + "1.0\tC1\t10.0.0.1\n";
    CHECK_THROWS_AS(parse(text), ParseError);
    try {
      parse(text);
    } catch (const ParseError& e) {
      CHECK(e.line_no() == 2);
      CHECK(e.line().find("10.0.0.1") != std::string::npos);
    }
  }
  SUBCASE("unparsable ip") {
    std::string text =
        std::string(kHeader13) +
        "1.0\tC1\tbogus\t1\t10.0.0.2\t2\ttcp\t1\t1\t1\t1\t1\tSF\n";
    CHECK_THROWS_AS(parse(text), ParseError);
  }
  SUBCASE("unparsable number") {
    std::string text =
        std::string(kHeader13) +
        "abc\tC1\t10.0.0.1\t1\t10.0.0.2\t2\ttcp\t1\t1\t1\t1\t1\tSF\n";
    CHECK_THROWS_AS(parse(text), ParseError);
  }
  SUBCASE("port out of range") {
    std::string text =
        std::string(kHeader13) +
        "1.0\tC1\t10.0.0.1\t70000\t10.0.0.2\t2\ttcp\t1\t1\t1\t1\t1\tSF\n";
    CHECK_THROWS_AS(parse(text), ParseError);
  }
  SUBCASE("missing mandatory column is fatal") {
    std::string text =
        "#fields\tuid\tid.orig_h\tid.orig_p\tid.resp_h\tid.resp_p\tproto\n";
    CHECK_THROWS_WITH_AS(parse(text), doctest::Contains("ts"), ParseError);
  }
}

TEST_CASE("parsing is loss-free and repeatable") {
  std::string text(kHeader13);
  text += "# a stray comment\n";
  for (int i = 0; i < 50; ++i)
    text += std::to_string(100.0 + i) +
            "\tC\t10.0.0.1\t1025\t10.0.0.2\t80\ttcp\t0.5\t10\t20\t1\t2\tSF\n";
  auto a = parse(text);
  auto b = parse(text);
  CHECK(a.records.size() == 50);
  CHECK(a.stats.records == 50);
  CHECK(a.records == b.records);
}

TEST_CASE("tsv round-trip preserves records") {
  // includes unset counters and a missing conn_state
  std::string text =
      std::string(kHeader13) +
      "1258531221.486539\tC1\t192.168.1.102\t68\t192.168.1.1\t67\tudp\t-\t-\t"
      "300\t1\t-\t-\n" +
      "42.25\tC2\tfe80::1\t137\tff02::fb\t137\tudp\t3.748\t350\t0\t7\t0\tS0\n";
  auto log = parse(text);
  REQUIRE(log.records.size() == 2);

  std::string again = format_fields_header(default_column_layout()) + "\n";
  for (const auto& rec : log.records)
    again += format_conn_line(rec, default_column_layout()) + "\n";
  auto log2 = parse(again);
  REQUIRE(log2.records.size() == 2);
  CHECK(log.records == log2.records);
}

TEST_CASE("manifest round-trip") {
  auto spec = parse_scenario_spec(sample_manifest());
  CHECK(spec.scenario_id == "neris-1");
  CHECK(spec.botnet_ips.size() == 1);
  CHECK(spec.botnet_ips.count(*IpAddr::parse("147.32.84.165")) == 1);
  CHECK(spec.victim_ips.empty());
  CHECK(spec.internal_cidr.str() == "147.32.0.0/16");
  CHECK(spec.t_start == 1313367235.0);

  auto spec2 = parse_scenario_spec(format_scenario_spec(spec));
  CHECK(spec2.scenario_id == spec.scenario_id);
  CHECK(spec2.botnet_ips == spec.botnet_ips);
  CHECK(spec2.t_end == spec.t_end);
}

TEST_CASE("manifest validation") {
  SUBCASE("victim_ips optional") {
    auto spec = parse_scenario_spec(sample_manifest() + "victim_ips = \n");
    CHECK(spec.victim_ips.empty());
  }
  SUBCASE("invalid time bounds") {
    std::string bad =
        "scenario_id = x\nattack_name = y\nbotnet_ips = 10.0.0.1\n"
        "internal_cidr = 10.0.0.0/8\nt_start = 100\nt_end = 50\n";
    CHECK_THROWS_WITH(parse_scenario_spec(bad), doctest::Contains("time bounds"));
  }
  SUBCASE("missing required key") {
    CHECK_THROWS_WITH(parse_scenario_spec("scenario_id = x\n"),
                      doctest::Contains("missing required key"));
  }
  SUBCASE("invalid cidr") {
    std::string bad =
        "scenario_id = x\nattack_name = y\nbotnet_ips = 10.0.0.1\n"
        "internal_cidr = nonsense\nt_start = 1\nt_end = 2\n";
    CHECK_THROWS_WITH(parse_scenario_spec(bad), doctest::Contains("internal_cidr"));
  }
  SUBCASE("empty botnet list") {
    std::string bad =
        "scenario_id = x\nattack_name = y\nbotnet_ips = \n"
        "internal_cidr = 10.0.0.0/8\nt_start = 1\nt_end = 2\n";
    CHECK_THROWS(parse_scenario_spec(bad));
  }
  SUBCASE("unknown key rejected") {
    CHECK_THROWS_WITH(parse_scenario_spec(sample_manifest() + "bogus = 1\n"),
                      doctest::Contains("unknown key"));
  }
}
