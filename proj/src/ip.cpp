#include "botflow/ip.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <charconv>
#include <cstring>

namespace botflow {

std::optional<IpAddr> IpAddr::parse(std::string_view text) {
  char buf[INET6_ADDRSTRLEN];
  if (text.empty() || text.size() >= sizeof(buf)) return std::nullopt;
  std::memcpy(buf, text.data(), text.size());
  buf[text.size()] = '\0';

  IpAddr out;
  in_addr a4{};
  if (inet_pton(AF_INET, buf, &a4) == 1) {
    out.v6 = false;
    std::memcpy(out.bytes.data(), &a4, 4);
    return out;
  }
  in6_addr a6{};
  if (inet_pton(AF_INET6, buf, &a6) == 1) {
    out.v6 = true;
    std::memcpy(out.bytes.data(), &a6, 16);
    return out;
  }
  return std::nullopt;
}

std::string IpAddr::str() const {
  char buf[INET6_ADDRSTRLEN] = {};
  if (v6) {
    in6_addr a{};
    std::memcpy(&a, bytes.data(), 16);
    inet_ntop(AF_INET6, &a, buf, sizeof buf);
  } else {
    in_addr a{};
    std::memcpy(&a, bytes.data(), 4);
    inet_ntop(AF_INET, &a, buf, sizeof buf);
  }
  return buf;
}

IpAddr IpAddr::subnet24() const {
  IpAddr out = *this;
  if (v6)
    std::fill(out.bytes.begin() + 8, out.bytes.end(), 0);
  else
    out.bytes[3] = 0;
  return out;
}

std::optional<Cidr> Cidr::parse(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  auto base = IpAddr::parse(text.substr(0, slash));
  if (!base) return std::nullopt;

  std::string_view len_str = text.substr(slash + 1);
  int len = -1;
  auto [p, ec] = std::from_chars(len_str.data(), len_str.data() + len_str.size(), len);
  if (ec != std::errc{} || p != len_str.data() + len_str.size()) return std::nullopt;
  int max_len = base->v6 ? 128 : 32;
  if (len < 0 || len > max_len) return std::nullopt;
  return Cidr{*base, len};
}

bool Cidr::contains(const IpAddr& addr) const {
  if (addr.v6 != base.v6) return false;
  int bits = prefix_len;
  for (int i = 0; bits > 0; ++i, bits -= 8) {
    std::uint8_t mask =
        bits >= 8 ? 0xFF : static_cast<std::uint8_t>(0xFF << (8 - bits));
    if ((addr.bytes[i] & mask) != (base.bytes[i] & mask)) return false;
  }
  return true;
}

std::string Cidr::str() const {
  return base.str() + "/" + std::to_string(prefix_len);
}

}  // namespace botflow
