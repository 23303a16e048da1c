#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "botflow/conn_record.hpp"

namespace botflow {

/// One named destination-port group. Port buckets match tcp and udp by
/// destination port; icmp_type buckets match icmp records by type.
struct PortBucket {
  std::string name;
  std::vector<std::uint16_t> ports;
  std::optional<std::uint16_t> icmp_type;
};

/// Ordered, pairwise-disjoint bucket list; the order is fixed and defines
/// feature column order. A terminal catch-all "Other" is implicit.
struct PortBucketConfig {
  std::vector<PortBucket> buckets;

  /// Popular application ports (ftp-21 ... rdp-3389, snmp-161) plus the
  /// icmp-3 and icmp-8 type buckets.
  static const PortBucketConfig& defaults();

  /// Index of the matching bucket; buckets.size() means "Other".
  std::size_t bucket_index(Proto proto, std::uint16_t port) const;
  /// Records key on their destination port; icmp keys on the type.
  std::size_t bucket_index(const ConnRecord& rec) const;
  const std::string& bucket_name(std::size_t idx) const;
  std::size_t bucket_count() const { return buckets.size() + 1; }

  /// Throws if any (proto, port) pair could match two buckets.
  void validate() const;
};

/// Name of the bucket a (proto, destination port) pair falls in.
const std::string& bucket_port(Proto proto, std::uint16_t port,
                               const PortBucketConfig& cfg);

}  // namespace botflow
