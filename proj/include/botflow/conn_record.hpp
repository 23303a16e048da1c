#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "botflow/ip.hpp"

namespace botflow {

enum class Proto : std::uint8_t { tcp = 0, udp = 1, icmp = 2 };
inline constexpr int kProtoCount = 3;

/// The 13 Zeek connection states.
enum class ConnState : std::uint8_t {
  S0, S1, SF, REJ, S2, S3, RSTO, RSTR, RSTOS0, RSTRH, SH, SHR, OTH
};
inline constexpr int kConnStateCount = 13;

std::optional<Proto> parse_proto(std::string_view text);
std::string_view proto_name(Proto p);
std::optional<ConnState> parse_conn_state(std::string_view text);
std::string_view conn_state_name(ConnState s);

/// One conn.log row. Counters that were unset in the log are normalized
/// to zero at construction; the missing_* flags remember which ones, so
/// a record can be written back out exactly as it was read.
///
/// For icmp the port fields carry the ICMP type/code as recorded by the
/// monitor (orig_p = type, dest_p = code).
struct ConnRecord {
  double ts = 0.0;
  IpAddr orig_h;
  std::uint16_t orig_p = 0;
  IpAddr dest_h;
  std::uint16_t dest_p = 0;
  Proto proto = Proto::tcp;
  double duration = 0.0;
  std::uint64_t orig_bytes = 0;
  std::uint64_t resp_bytes = 0;
  std::uint64_t orig_pkts = 0;
  std::uint64_t resp_pkts = 0;
  std::optional<ConnState> conn_state;

  bool missing_duration = false;
  bool missing_orig_bytes = false;
  bool missing_resp_bytes = false;
  bool missing_orig_pkts = false;
  bool missing_resp_pkts = false;

  bool operator==(const ConnRecord&) const = default;
};

}  // namespace botflow
