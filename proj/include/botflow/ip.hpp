#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace botflow {

/// IPv4 or IPv6 address. Ordering is (family, bytes), so v4 sorts before
/// v6 and anything keyed by address iterates in a stable order.
struct IpAddr {
  bool v6 = false;
  std::array<std::uint8_t, 16> bytes{};  // v4 uses bytes[0..3], rest zero

  static std::optional<IpAddr> parse(std::string_view text);
  std::string str() const;

  /// Subnet key with the host part zeroed: /24 for v4, /64 for v6.
  IpAddr subnet24() const;

  auto operator<=>(const IpAddr&) const = default;
};

/// CIDR prefix such as 147.32.0.0/16.
struct Cidr {
  IpAddr base;
  int prefix_len = 0;

  static std::optional<Cidr> parse(std::string_view text);
  bool contains(const IpAddr& addr) const;
  std::string str() const;
};

}  // namespace botflow
