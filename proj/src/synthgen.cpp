#include "botflow/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "botflow/conn_record.hpp"
#include "botflow/models/common.hpp"

namespace botflow::synth {

using botflow::ConnRecord;
using botflow::ConnState;
using botflow::IpAddr;
using botflow::Proto;
using botflow::models::Rng;

namespace {

constexpr double kWindowLen = 30.0;

IpAddr v4(int a, int b, int c, int d) {
  IpAddr ip;
  ip.bytes = {static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b),
              static_cast<std::uint8_t>(c), static_cast<std::uint8_t>(d)};
  return ip;
}

double quantize_us(double t) { return std::round(t * 1e6) / 1e6; }

/// External address from a handful of provider-looking pools; never in
/// 198.51.100.0/24 (reserved for the ddos victim).
IpAddr random_external(Rng& rng) {
  switch (rng.below(4)) {
    case 0: return v4(93, 184, 1 + static_cast<int>(rng.below(200)), 1 + static_cast<int>(rng.below(250)));
    case 1: return v4(151, 101, 1 + static_cast<int>(rng.below(120)), 1 + static_cast<int>(rng.below(250)));
    case 2: return v4(185, 60, 1 + static_cast<int>(rng.below(200)), 1 + static_cast<int>(rng.below(250)));
    default: return v4(203, static_cast<int>(rng.below(200)), static_cast<int>(rng.below(200)), 1 + static_cast<int>(rng.below(250)));
  }
}

/// Wide /24-spread pool the spam bots blast into.
IpAddr random_spam_target(Rng& rng) {
  return v4(203, static_cast<int>(rng.below(200)), static_cast<int>(rng.below(200)),
            1 + static_cast<int>(rng.below(250)));
}

/// One shared field sampler: every record of a spam scenario draws its
/// duration/bytes/packets/state from these marginals regardless of role,
/// so no single field separates the classes.
void sample_fields(Rng& rng, ConnRecord& rec) {
  rec.duration = std::min(rng.exponential(1.0 / 1.1), 60.0);
  rec.orig_bytes = std::max<std::uint64_t>(
      40, static_cast<std::uint64_t>(std::llround(std::exp(rng.normal(6.2, 1.0)))));
  rec.resp_bytes = std::max<std::uint64_t>(
      40, static_cast<std::uint64_t>(std::llround(std::exp(rng.normal(7.0, 1.2)))));
  rec.orig_pkts = 2 + rec.orig_bytes / 600;
  rec.resp_pkts = 2 + rec.resp_bytes / 600;
  double u = rng.uniform();
  rec.conn_state = u < 0.86   ? ConnState::SF
                   : u < 0.93 ? ConnState::S0
                   : u < 0.97 ? ConnState::REJ
                              : ConnState::RSTO;
}

std::uint16_t ephemeral_port(Rng& rng) {
  return static_cast<std::uint16_t>(1024 + rng.below(64512));
}

struct ServicePick {
  Proto proto;
  std::uint16_t port;
  bool internal_peer = false;  // talk to another internal host
  bool wide_dest = false;      // one-off random external destination
};

/// Background service mix shared by both scenario kinds.
ServicePick pick_service(Rng& rng) {
  double u = rng.uniform();
  if (u < 0.38) return {Proto::tcp, 80};
  if (u < 0.63) return {Proto::tcp, 443};
  if (u < 0.78) return {Proto::udp, 53};
  if (u < 0.86) return {Proto::tcp, 25};
  if (u < 0.90) return {Proto::udp, 123};
  if (u < 0.94) return {Proto::tcp, 445, true};
  if (u < 0.96) return {Proto::icmp, 8};
  return {Proto::tcp, 0, false, true};  // unpopular high port -> Other
}

struct Emit {
  ConnRecord rec;
  std::uint64_t seq;
};

struct Generator {
  const SynthParams& p;
  double t_end;
  std::int64_t n_windows;
  std::vector<Emit> emits;
  std::uint64_t next_seq = 0;

  void push(const ConnRecord& rec) {
    Emit e{rec, next_seq++};
    e.rec.ts = quantize_us(e.rec.ts);
    emits.push_back(e);
  }

  /// Poisson background stream for one host over the whole capture.
  void run_background_host(const IpAddr& host, Rng& rng, double rate,
                           const std::vector<IpAddr>& peers,
                           const std::vector<IpAddr>& internal_peers) {
    double t = p.t0 + rng.exponential(rate);
    while (t < t_end) {
      ServicePick pick = pick_service(rng);
      ConnRecord rec;
      rec.ts = t;
      rec.orig_h = host;
      rec.orig_p = ephemeral_port(rng);
      rec.proto = pick.proto;
      if (pick.internal_peer && !internal_peers.empty()) {
        rec.dest_h = internal_peers[rng.below(internal_peers.size())];
        rec.dest_p = pick.port;
      } else if (pick.wide_dest) {
        rec.dest_h = random_external(rng);
        rec.dest_p = static_cast<std::uint16_t>(10000 + rng.below(40000));
      } else {
        rec.dest_h = peers[rng.below(peers.size())];
        rec.dest_p = pick.port;
      }
      if (pick.proto == Proto::icmp) {
        rec.orig_p = 8;  // echo request type
        rec.dest_p = 0;
      }
      sample_fields(rng, rec);
      push(rec);
      t += rng.exponential(rate);
    }
  }
};

std::vector<std::int64_t> pick_attack_windows(Rng& rng, std::int64_t n_windows,
                                              int count) {
  std::vector<std::int64_t> all(n_windows);
  std::iota(all.begin(), all.end(), 0);
  for (int i = 0; i < count; ++i)
    std::swap(all[i], all[i + rng.below(all.size() - i)]);
  std::vector<std::int64_t> out(all.begin(), all.begin() + count);
  std::sort(out.begin(), out.end());
  return out;
}

/// Per-bot attack-window quota from the imbalance target; validates
/// feasibility.
std::vector<int> attack_quota(double benign_rows_expected, double ratio,
                              int n_bots, std::int64_t n_windows) {
  double target = benign_rows_expected / ratio;
  long total = std::lround(target);
  if (total < n_bots)
    throw std::invalid_argument(
        "infeasible imbalance target: fewer malicious rows than bots");
  std::vector<int> quota(n_bots, static_cast<int>(total / n_bots));
  for (long i = 0; i < total % n_bots; ++i) quota[i] += 1;
  for (int q : quota)
    if (q < 1 || q > n_windows)
      throw std::invalid_argument(
          "infeasible imbalance target: per-bot attack windows out of range");
  return quota;
}

std::string base62(std::uint64_t v, int len) {
  static const char digits[] =
      "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";
  std::string out(len, '0');
  for (int i = len - 1; i >= 0; --i) {
    out[i] = digits[v % 62];
    v /= 62;
  }
  return out;
}

const char* service_name(Proto proto, std::uint16_t dest_p) {
  if (proto == Proto::udp && dest_p == 53) return "dns";
  if (proto == Proto::udp && dest_p == 123) return "ntp";
  if (proto == Proto::tcp && dest_p == 80) return "http";
  if (proto == Proto::tcp && dest_p == 443) return "ssl";
  if (proto == Proto::tcp && dest_p == 25) return "smtp";
  return "-";
}

std::string render_log(std::vector<Emit>& emits, const SynthParams& p) {
  std::stable_sort(emits.begin(), emits.end(), [](const Emit& a, const Emit& b) {
    if (a.rec.ts != b.rec.ts) return a.rec.ts < b.rec.ts;
    return a.seq < b.seq;
  });

  std::string out;
  out.reserve(emits.size() * 160 + 1024);
  out += "#separator \\x09\n";
  out += "#set_separator\t,\n";
  out += "#empty_field\t(empty)\n";
  out += "#unset_field\t-\n";
  out += "#path\tconn\n";
  out += "#open\t" + std::to_string(static_cast<std::int64_t>(p.t0)) + "\n";
  out +=
      "#fields\tts\tuid\tid.orig_h\tid.orig_p\tid.resp_h\tid.resp_p\tproto\t"
      "service\tduration\torig_bytes\tresp_bytes\tconn_state\tlocal_orig\t"
      "missed_bytes\thistory\torig_pkts\torig_ip_bytes\tresp_pkts\t"
      "resp_ip_bytes\ttunnel_parents\n";
  out +=
      "#types\ttime\tstring\taddr\tport\taddr\tport\tenum\tstring\tinterval\t"
      "count\tcount\tstring\tbool\tcount\tstring\tcount\tcount\tcount\tcount\t"
      "table[string]\n";

  char buf[64];
  for (const Emit& e : emits) {
    const ConnRecord& r = e.rec;
    std::snprintf(buf, sizeof buf, "%.6f", r.ts);
    out += buf;
    out += '\t';
    out += 'C' + base62(Rng::derive(p.seed, 0xC0FFEE ^ e.seq), 10);
    out += '\t';
    out += r.orig_h.str();
    out += '\t';
    out += std::to_string(r.orig_p);
    out += '\t';
    out += r.dest_h.str();
    out += '\t';
    out += std::to_string(r.dest_p);
    out += '\t';
    out += proto_name(r.proto);
    out += '\t';
    out += service_name(r.proto, r.dest_p);
    out += '\t';
    std::snprintf(buf, sizeof buf, "%.6f", r.duration);
    out += buf;
    out += '\t';
    out += std::to_string(r.orig_bytes);
    out += '\t';
    out += std::to_string(r.resp_bytes);
    out += '\t';
    out += conn_state_name(*r.conn_state);
    out += "\t-\t0\t-\t";
    out += std::to_string(r.orig_pkts);
    out += '\t';
    out += std::to_string(r.orig_bytes + 40 * r.orig_pkts);
    out += '\t';
    out += std::to_string(r.resp_pkts);
    out += '\t';
    out += std::to_string(r.resp_bytes + 40 * r.resp_pkts);
    out += "\t(empty)\n";
  }
  out += "#close\t" + std::to_string(static_cast<std::int64_t>(p.t0)) + "\n";
  return out;
}

void validate_common(const SynthParams& p) {
  if (p.duration_s < 2 * kWindowLen)
    throw std::invalid_argument("synth: duration must cover at least two windows");
  if (p.n_background_hosts < 4)
    throw std::invalid_argument("synth: need at least 4 background hosts");
  if (p.n_bots < 1) throw std::invalid_argument("synth: need at least one bot");
  if (!(p.imbalance_ratio >= 1.0))
    throw std::invalid_argument("synth: imbalance ratio must be >= 1");
  if (p.scenario_id.empty() || p.scenario_id.find(',') != std::string::npos)
    throw std::invalid_argument("synth: scenario_id must be non-empty and comma-free");
}

constexpr double kPlainRate = 0.1;   // background records per second
constexpr double kMailerRate = 0.2;  // bulk-mailer records per second

double p_active(double rate) { return 1.0 - std::exp(-rate * kWindowLen); }

Scenario gen_spam(const SynthParams& p) {
  const int n_mailers = 2;
  const int n_plain = p.n_background_hosts - n_mailers;
  Generator gen{p, p.t0 + p.duration_s,
                static_cast<std::int64_t>(std::floor(p.duration_s / kWindowLen)),
                {},
                0};

  double benign_rows = static_cast<double>(gen.n_windows) *
                       (n_plain * p_active(kPlainRate) + n_mailers * p_active(kMailerRate));
  std::vector<int> quota =
      attack_quota(benign_rows, p.imbalance_ratio, p.n_bots, gen.n_windows);

  std::vector<IpAddr> bots, mailers, plain;
  for (int b = 0; b < p.n_bots; ++b) bots.push_back(v4(10, 20, 1, 1 + b));
  for (int m = 0; m < n_mailers; ++m) mailers.push_back(v4(10, 20, 2, 1 + m));
  for (int i = 0; i < n_plain; ++i)
    plain.push_back(v4(10, 20, 3 + i / 200, 1 + i % 200));

  // bots first, then mailers, then plain hosts; each on its own rng stream
  for (int b = 0; b < p.n_bots; ++b) {
    Rng rng(Rng::derive(p.seed, 1000 + b));
    auto windows = pick_attack_windows(rng, gen.n_windows, quota[b]);
    for (std::int64_t w : windows) {
      double wstart = p.t0 + static_cast<double>(w) * kWindowLen;
      double wend = wstart + kWindowLen;
      double t = wstart + rng.uniform(0.4, 1.2);
      int burst = 95 + static_cast<int>(rng.below(11));
      for (int k = 0; k < burst && t < wend - 0.01; ++k) {
        ConnRecord rec;
        rec.ts = t;
        rec.orig_h = bots[b];
        rec.orig_p = ephemeral_port(rng);
        rec.dest_h = random_spam_target(rng);
        rec.dest_p = 25;
        rec.proto = Proto::tcp;
        sample_fields(rng, rec);
        gen.push(rec);
        t += rng.uniform(0.20, 0.26);
      }
    }
  }

  for (int m = 0; m < n_mailers; ++m) {
    Rng rng(Rng::derive(p.seed, 2000 + m));
    std::vector<IpAddr> pool;
    for (int i = 0; i < 300; ++i) pool.push_back(random_external(rng));
    double t = p.t0 + rng.exponential(kMailerRate);
    while (t < gen.t_end) {
      ConnRecord rec;
      rec.ts = t;
      rec.orig_h = mailers[m];
      rec.orig_p = ephemeral_port(rng);
      rec.dest_h = pool[rng.below(pool.size())];
      rec.dest_p = 25;
      rec.proto = Proto::tcp;
      sample_fields(rng, rec);
      gen.push(rec);
      t += rng.exponential(kMailerRate);
    }
  }

  for (int i = 0; i < n_plain; ++i) {
    Rng rng(Rng::derive(p.seed, 3000 + i));
    std::vector<IpAddr> peers;
    for (int k = 0; k < 6; ++k) peers.push_back(random_external(rng));
    std::vector<IpAddr> internal_peers;
    for (int k = 0; k < 3; ++k)
      internal_peers.push_back(plain[rng.below(plain.size())]);
    gen.run_background_host(plain[i], rng, kPlainRate, peers, internal_peers);
  }

  Scenario out;
  out.conn_log = render_log(gen.emits, p);
  out.spec.scenario_id = p.scenario_id;
  out.spec.attack_name = "spam burst (synthetic)";
  out.spec.botnet_ips.insert(bots.begin(), bots.end());
  out.spec.internal_cidr = *botflow::Cidr::parse("10.20.0.0/16");
  out.spec.t_start = p.t0;
  out.spec.t_end = p.t0 + p.duration_s;
  return out;
}

Scenario gen_ddos(const SynthParams& p) {
  const int n_plain = p.n_background_hosts;
  const IpAddr victim = v4(198, 51, 100, 7);
  Generator gen{p, p.t0 + p.duration_s,
                static_cast<std::int64_t>(std::floor(p.duration_s / kWindowLen)),
                {},
                0};

  // bots emit background traffic in every window, so under fine labels
  // their non-attack windows count as benign rows
  double benign_rows = static_cast<double>(gen.n_windows) *
                       (n_plain + p.n_bots) * p_active(kPlainRate);
  std::vector<int> quota =
      attack_quota(benign_rows, p.imbalance_ratio, p.n_bots, gen.n_windows);

  std::vector<IpAddr> bots, plain;
  for (int b = 0; b < p.n_bots; ++b) bots.push_back(v4(10, 30, 1, 1 + b));
  for (int i = 0; i < n_plain; ++i)
    plain.push_back(v4(10, 30, 3 + i / 200, 1 + i % 200));

  for (int b = 0; b < p.n_bots; ++b) {
    Rng rng(Rng::derive(p.seed, 1000 + b));
    auto windows = pick_attack_windows(rng, gen.n_windows, quota[b]);
    for (std::int64_t w : windows) {
      double wstart = p.t0 + static_cast<double>(w) * kWindowLen;
      double wend = wstart + kWindowLen;
      bool udp_flood = rng.below(2) == 0;
      std::uint16_t flood_src = ephemeral_port(rng);
      double t = wstart + rng.uniform(0.3, 1.2);
      int burst = 170 + static_cast<int>(rng.below(60));
      for (int k = 0; k < burst && t < wend - 0.05; ++k) {
        ConnRecord rec;
        rec.ts = t;
        rec.orig_h = bots[b];
        rec.dest_h = victim;
        rec.duration = 0.0;
        if (udp_flood) {
          rec.proto = Proto::udp;
          rec.orig_p = flood_src;
          rec.dest_p = 161;
          rec.orig_bytes = 46;
          rec.conn_state = ConnState::S0;
        } else {
          rec.proto = Proto::icmp;
          rec.orig_p = 8;
          rec.dest_p = 0;
          rec.orig_bytes = 56;
          rec.conn_state = ConnState::OTH;
        }
        rec.resp_bytes = 0;
        rec.orig_pkts = 1;
        rec.resp_pkts = 0;
        gen.push(rec);
        t += rng.exponential(9.0);
      }
    }
    // background-looking traffic all along, which coarse labels smear
    Rng bg_rng(Rng::derive(p.seed, 5000 + b));
    std::vector<IpAddr> peers;
    for (int k = 0; k < 6; ++k) peers.push_back(random_external(bg_rng));
    gen.run_background_host(bots[b], bg_rng, kPlainRate, peers, {});
  }

  for (int i = 0; i < n_plain; ++i) {
    Rng rng(Rng::derive(p.seed, 3000 + i));
    std::vector<IpAddr> peers;
    for (int k = 0; k < 6; ++k) peers.push_back(random_external(rng));
    std::vector<IpAddr> internal_peers;
    for (int k = 0; k < 3; ++k)
      internal_peers.push_back(plain[rng.below(plain.size())]);
    gen.run_background_host(plain[i], rng, kPlainRate, peers, internal_peers);
  }

  Scenario out;
  out.conn_log = render_log(gen.emits, p);
  out.spec.scenario_id = p.scenario_id;
  out.spec.attack_name = "udp/icmp flood (synthetic)";
  out.spec.botnet_ips.insert(bots.begin(), bots.end());
  out.spec.victim_ips.insert(victim);
  out.spec.internal_cidr = *botflow::Cidr::parse("10.30.0.0/16");
  out.spec.t_start = p.t0;
  out.spec.t_end = p.t0 + p.duration_s;
  return out;
}

}  // namespace

Scenario gen_scenario(const SynthParams& params) {
  validate_common(params);
  return params.kind == Kind::spam ? gen_spam(params) : gen_ddos(params);
}

SynthParams spam_preset(int index) {
  if (index < 0 || index > 2)
    throw std::invalid_argument("spam preset index must be 0, 1 or 2");
  SynthParams p;
  p.kind = Kind::spam;
  p.n_background_hosts = 50;
  p.duration_s = 1800.0;
  p.n_bots = 2;
  p.imbalance_ratio = 134.0;
  p.seed = 0x51AA0001ull + static_cast<std::uint64_t>(index) * 7919;
  p.scenario_id = "synth-spam-" + std::to_string(index + 1);
  p.t0 = 1313368800.0 + 86400.0 * index;
  return p;
}

SynthParams ddos_preset(int index) {
  if (index < 0 || index > 2)
    throw std::invalid_argument("ddos preset index must be 0, 1 or 2");
  SynthParams p;
  p.kind = Kind::ddos;
  p.n_background_hosts = 43;
  p.duration_s = 1500.0;
  p.n_bots = 3;
  p.imbalance_ratio = 60.0;
  p.seed = 0xDD050001ull + static_cast<std::uint64_t>(index) * 104729;
  p.scenario_id = "synth-ddos-" + std::to_string(index + 1);
  p.t0 = 1313628000.0 + 86400.0 * index;
  return p;
}

}  // namespace botflow::synth
