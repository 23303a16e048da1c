#include "botflow/conn_log.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

namespace botflow {

namespace {

constexpr std::array<std::string_view, kProtoCount> kProtoNames{"tcp", "udp", "icmp"};
constexpr std::array<std::string_view, kConnStateCount> kStateNames{
    "S0", "S1", "SF", "REJ", "S2", "S3", "RSTO",
    "RSTR", "RSTOS0", "RSTRH", "SH", "SHR", "OTH"};

bool is_unset(std::string_view v) { return v == "-" || v == "(empty)"; }

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

double parse_double_or_throw(std::string_view v, std::size_t line_no,
                             const std::string& line, const char* what) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size() || !std::isfinite(out))
    throw ParseError(line_no, line, std::string("unparsable ") + what + " '" + std::string(v) + "'");
  return out;
}

std::uint64_t parse_count_or_throw(std::string_view v, std::size_t line_no,
                                   const std::string& line, const char* what) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ParseError(line_no, line, std::string("unparsable ") + what + " '" + std::string(v) + "'");
  return out;
}

std::uint16_t parse_port_or_throw(std::string_view v, std::size_t line_no,
                                  const std::string& line, const char* what) {
  std::uint32_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size() || out > 65535)
    throw ParseError(line_no, line, std::string("port out of range for ") + what + ": '" + std::string(v) + "'");
  return static_cast<std::uint16_t>(out);
}

void append_double(std::string& out, double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, p);
}

}  // namespace

ParseError::ParseError(std::size_t line_no, std::string line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line_no) + ": " + what),
      line_no_(line_no),
      line_(std::move(line)) {}

std::optional<Proto> parse_proto(std::string_view text) {
  for (int i = 0; i < kProtoCount; ++i)
    if (text == kProtoNames[i]) return static_cast<Proto>(i);
  return std::nullopt;
}

std::string_view proto_name(Proto p) { return kProtoNames[static_cast<int>(p)]; }

std::optional<ConnState> parse_conn_state(std::string_view text) {
  for (int i = 0; i < kConnStateCount; ++i)
    if (text == kStateNames[i]) return static_cast<ConnState>(i);
  return std::nullopt;
}

std::string_view conn_state_name(ConnState s) {
  return kStateNames[static_cast<int>(s)];
}

const FieldMap& FieldMap::defaults() {
  static const FieldMap map = [] {
    FieldMap m;
    m.bindings = {
        {"ts", ConnField::ts},
        {"id.orig_h", ConnField::orig_h},
        {"id.orig_p", ConnField::orig_p},
        {"id.resp_h", ConnField::resp_h},
        {"id.resp_p", ConnField::resp_p},
        // aliases used in written descriptions of the format
        {"id.dest_h", ConnField::resp_h},
        {"id.dest_p", ConnField::resp_p},
        {"proto", ConnField::proto},
        {"duration", ConnField::duration},
        {"orig_bytes", ConnField::orig_bytes},
        {"resp_bytes", ConnField::resp_bytes},
        {"orig_pkts", ConnField::orig_pkts},
        {"resp_pkts", ConnField::resp_pkts},
        {"conn_state", ConnField::conn_state},
    };
    return m;
  }();
  return map;
}

ConnLog parse_conn_log(std::istream& in, const FieldMap& map) {
  ConnLog out;
  std::string line;
  std::size_t line_no = 0;
  bool have_fields = false;
  std::vector<int> col_field;  // per column: ConnField index or -1
  ConnRecord blank;            // missing flags preset for absent columns

  auto has_column = [&](ConnField f) {
    for (int c : col_field)
      if (c == static_cast<int>(f)) return true;
    return false;
  };
  auto require_column = [&](ConnField f, const char* name) {
    if (!has_column(f))
      throw ParseError(line_no, line, std::string("missing mandatory column ") + name);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    if (line[0] == '#') {
      ++out.stats.comment_lines;
      if (line.rfind("#fields", 0) == 0) {
        auto parts = split_tabs(line);
        col_field.clear();
        std::set<std::string> seen_unknown;
        for (std::size_t i = 1; i < parts.size(); ++i) {
          std::string name(parts[i]);
          auto it = map.bindings.find(name);
          if (it == map.bindings.end()) {
            col_field.push_back(-1);
            if (seen_unknown.insert(name).second)
              out.stats.ignored_columns.push_back(name);
          } else {
            col_field.push_back(static_cast<int>(it->second));
          }
        }
        require_column(ConnField::ts, "ts");
        require_column(ConnField::orig_h, "id.orig_h");
        require_column(ConnField::orig_p, "id.orig_p");
        require_column(ConnField::resp_h, "id.resp_h");
        require_column(ConnField::resp_p, "id.resp_p");
        require_column(ConnField::proto, "proto");
        blank = ConnRecord{};
        blank.missing_duration = !has_column(ConnField::duration);
        blank.missing_orig_bytes = !has_column(ConnField::orig_bytes);
        blank.missing_resp_bytes = !has_column(ConnField::resp_bytes);
        blank.missing_orig_pkts = !has_column(ConnField::orig_pkts);
        blank.missing_resp_pkts = !has_column(ConnField::resp_pkts);
        have_fields = true;
      }
      continue;
    }

    if (!have_fields)
      throw ParseError(line_no, line, "data line before #fields header");

    auto values = split_tabs(line);
    if (values.size() != col_field.size())
      throw ParseError(line_no, line,
                       "expected " + std::to_string(col_field.size()) + " columns, got " +
                           std::to_string(values.size()));

    ConnRecord rec = blank;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (col_field[i] < 0) continue;
      auto field = static_cast<ConnField>(col_field[i]);
      std::string_view v = values[i];
      bool unset = is_unset(v);
      switch (field) {
        case ConnField::ts:
          if (unset) throw ParseError(line_no, line, "missing value for mandatory column ts");
          rec.ts = parse_double_or_throw(v, line_no, line, "timestamp");
          if (rec.ts < 0) throw ParseError(line_no, line, "negative timestamp");
          break;
        case ConnField::orig_h:
        case ConnField::resp_h: {
          if (unset) throw ParseError(line_no, line, "missing value for mandatory address column");
          auto ip = IpAddr::parse(v);
          if (!ip) throw ParseError(line_no, line, "unparsable IP '" + std::string(v) + "'");
          (field == ConnField::orig_h ? rec.orig_h : rec.dest_h) = *ip;
          break;
        }
        case ConnField::orig_p:
          if (unset) throw ParseError(line_no, line, "missing value for mandatory column id.orig_p");
          rec.orig_p = parse_port_or_throw(v, line_no, line, "id.orig_p");
          break;
        case ConnField::resp_p:
          if (unset) throw ParseError(line_no, line, "missing value for mandatory column id.resp_p");
          rec.dest_p = parse_port_or_throw(v, line_no, line, "id.resp_p");
          break;
        case ConnField::proto: {
          if (unset) throw ParseError(line_no, line, "missing value for mandatory column proto");
          auto p = parse_proto(v);
          if (!p) throw ParseError(line_no, line, "unknown protocol '" + std::string(v) + "'");
          rec.proto = *p;
          break;
        }
        case ConnField::duration:
          if (unset) {
            rec.duration = 0.0;
            rec.missing_duration = true;
          } else {
            rec.duration = parse_double_or_throw(v, line_no, line, "duration");
            if (rec.duration < 0) throw ParseError(line_no, line, "negative duration");
          }
          break;
        case ConnField::orig_bytes:
          if (unset) rec.missing_orig_bytes = true;
          else rec.orig_bytes = parse_count_or_throw(v, line_no, line, "orig_bytes");
          break;
        case ConnField::resp_bytes:
          if (unset) rec.missing_resp_bytes = true;
          else rec.resp_bytes = parse_count_or_throw(v, line_no, line, "resp_bytes");
          break;
        case ConnField::orig_pkts:
          if (unset) rec.missing_orig_pkts = true;
          else rec.orig_pkts = parse_count_or_throw(v, line_no, line, "orig_pkts");
          break;
        case ConnField::resp_pkts:
          if (unset) rec.missing_resp_pkts = true;
          else rec.resp_pkts = parse_count_or_throw(v, line_no, line, "resp_pkts");
          break;
        case ConnField::conn_state: {
          if (unset) break;
          auto s = parse_conn_state(v);
          if (!s) throw ParseError(line_no, line, "unknown conn_state '" + std::string(v) + "'");
          rec.conn_state = *s;
          break;
        }
      }
    }
    out.records.push_back(rec);
    ++out.stats.records;
  }

  if (!have_fields)
    throw ParseError(line_no, "", "no #fields header found");
  return out;
}

ConnLog parse_conn_log_file(const std::string& path, const FieldMap& map) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open conn.log: " + path);
  return parse_conn_log(in, map);
}

const std::vector<std::string>& default_column_layout() {
  static const std::vector<std::string> layout{
      "ts",         "id.orig_h",  "id.orig_p", "id.resp_h",
      "id.resp_p",  "proto",      "duration",  "orig_bytes",
      "resp_bytes", "orig_pkts",  "resp_pkts", "conn_state"};
  return layout;
}

std::string format_fields_header(const std::vector<std::string>& columns) {
  std::string out = "#fields";
  for (const auto& c : columns) {
    out += '\t';
    out += c;
  }
  return out;
}

std::string format_conn_line(const ConnRecord& rec,
                             const std::vector<std::string>& columns,
                             const FieldMap& map) {
  std::string out;
  bool first = true;
  for (const auto& name : columns) {
    if (!first) out += '\t';
    first = false;
    auto it = map.bindings.find(name);
    if (it == map.bindings.end()) {
      out += '-';
      continue;
    }
    switch (it->second) {
      case ConnField::ts: append_double(out, rec.ts); break;
      case ConnField::orig_h: out += rec.orig_h.str(); break;
      case ConnField::orig_p: out += std::to_string(rec.orig_p); break;
      case ConnField::resp_h: out += rec.dest_h.str(); break;
      case ConnField::resp_p: out += std::to_string(rec.dest_p); break;
      case ConnField::proto: out += proto_name(rec.proto); break;
      case ConnField::duration:
        if (rec.missing_duration) out += '-';
        else append_double(out, rec.duration);
        break;
      case ConnField::orig_bytes:
        if (rec.missing_orig_bytes) out += '-';
        else out += std::to_string(rec.orig_bytes);
        break;
      case ConnField::resp_bytes:
        if (rec.missing_resp_bytes) out += '-';
        else out += std::to_string(rec.resp_bytes);
        break;
      case ConnField::orig_pkts:
        if (rec.missing_orig_pkts) out += '-';
        else out += std::to_string(rec.orig_pkts);
        break;
      case ConnField::resp_pkts:
        if (rec.missing_resp_pkts) out += '-';
        else out += std::to_string(rec.resp_pkts);
        break;
      case ConnField::conn_state:
        if (rec.conn_state) out += conn_state_name(*rec.conn_state);
        else out += '-';
        break;
    }
  }
  return out;
}

}  // namespace botflow
