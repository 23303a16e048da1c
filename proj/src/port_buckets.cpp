#include "botflow/port_buckets.hpp"

#include <set>
#include <stdexcept>

namespace botflow {

const PortBucketConfig& PortBucketConfig::defaults() {
  static const PortBucketConfig cfg = [] {
    PortBucketConfig c;
    const std::pair<std::uint16_t, const char*> ports[] = {
        {21, "ftp-21"},        {22, "ssh-22"},          {23, "telnet-23"},
        {25, "smtp-25"},       {53, "dns-53"},          {80, "http-80"},
        {110, "pop3-110"},     {123, "ntp-123"},        {135, "msrpc-135"},
        {138, "netbios-dgm-138"}, {139, "netbios-ssn-139"}, {143, "imap-143"},
        {161, "snmp-161"},     {443, "https-443"},      {445, "smb-445"},
        {993, "imaps-993"},    {995, "pop3s-995"},      {3389, "rdp-3389"},
    };
    for (auto [port, name] : ports)
      c.buckets.push_back({name, {port}, std::nullopt});
    c.buckets.push_back({"icmp-3", {}, std::uint16_t{3}});
    c.buckets.push_back({"icmp-8", {}, std::uint16_t{8}});
    c.validate();
    return c;
  }();
  return cfg;
}

std::size_t PortBucketConfig::bucket_index(Proto proto, std::uint16_t port) const {
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    const PortBucket& b = buckets[i];
    if (proto == Proto::icmp) {
      if (b.icmp_type && *b.icmp_type == port) return i;
    } else {
      for (std::uint16_t p : b.ports)
        if (p == port) return i;
    }
  }
  return buckets.size();  // Other
}

std::size_t PortBucketConfig::bucket_index(const ConnRecord& rec) const {
  // tcp/udp key on the destination port; icmp keys on the type, which
  // the monitor stores in orig_p.
  std::uint16_t port = rec.proto == Proto::icmp ? rec.orig_p : rec.dest_p;
  return bucket_index(rec.proto, port);
}

const std::string& PortBucketConfig::bucket_name(std::size_t idx) const {
  static const std::string other = "Other";
  return idx < buckets.size() ? buckets[idx].name : other;
}

void PortBucketConfig::validate() const {
  std::set<std::uint16_t> seen_ports;
  std::set<std::uint16_t> seen_types;
  std::set<std::string> seen_names;
  for (const auto& b : buckets) {
    if (b.name.empty() || b.name == "Other")
      throw std::invalid_argument("bucket names must be non-empty and not 'Other'");
    if (!seen_names.insert(b.name).second)
      throw std::invalid_argument("duplicate bucket name: " + b.name);
    for (std::uint16_t p : b.ports)
      if (!seen_ports.insert(p).second)
        throw std::invalid_argument("port " + std::to_string(p) + " appears in two buckets");
    if (b.icmp_type && !seen_types.insert(*b.icmp_type).second)
      throw std::invalid_argument("icmp type " + std::to_string(*b.icmp_type) +
                                  " appears in two buckets");
  }
}

const std::string& bucket_port(Proto proto, std::uint16_t port,
                               const PortBucketConfig& cfg) {
  return cfg.bucket_name(cfg.bucket_index(proto, port));
}

}  // namespace botflow
