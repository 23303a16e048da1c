#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "botflow/conn_record.hpp"

namespace botflow {

/// Parse failure with the line it happened on.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line_no, std::string line, const std::string& what);
  std::size_t line_no() const { return line_no_; }
  const std::string& line() const { return line_; }

 private:
  std::size_t line_no_;
  std::string line_;
};

enum class ConnField {
  ts, orig_h, orig_p, resp_h, resp_p, proto,
  duration, orig_bytes, resp_bytes, orig_pkts, resp_pkts, conn_state
};

/// Header-name -> record-field binding. The default map speaks Zeek
/// (`id.resp_h`) and also accepts the `id.dest_h` style aliases, so real
/// logs work unmodified.
struct FieldMap {
  std::map<std::string, ConnField> bindings;
  static const FieldMap& defaults();
};

struct ParseStats {
  std::size_t records = 0;
  std::size_t comment_lines = 0;
  /// header columns with no binding, ignored while parsing
  std::vector<std::string> ignored_columns;
};

struct ConnLog {
  std::vector<ConnRecord> records;
  ParseStats stats;
};

/// Reads a Zeek TSV conn.log: `#` lines are comments, a `#fields` line is
/// mandatory and binds columns by name, `-` and `(empty)` mean unset.
/// Records come out in file order.
ConnLog parse_conn_log(std::istream& in, const FieldMap& map = FieldMap::defaults());
ConnLog parse_conn_log_file(const std::string& path, const FieldMap& map = FieldMap::defaults());

/// Canonical 12-column layout used when writing records back out.
const std::vector<std::string>& default_column_layout();
std::string format_fields_header(const std::vector<std::string>& columns);
std::string format_conn_line(const ConnRecord& rec,
                             const std::vector<std::string>& columns,
                             const FieldMap& map = FieldMap::defaults());

}  // namespace botflow
