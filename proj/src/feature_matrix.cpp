#include "botflow/feature_matrix.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace botflow {

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, p);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

void FeatureMatrix::add_row(RowKey key, std::span<const double> values, int label) {
  if (values.size() != cols())
    throw std::invalid_argument("row width " + std::to_string(values.size()) +
                                " does not match schema width " + std::to_string(cols()));
  keys_.push_back(std::move(key));
  labels_.push_back(label);
  values_.insert(values_.end(), values.begin(), values.end());
}

void FeatureMatrix::resize_rows(std::size_t n) {
  keys_.resize(n);
  labels_.resize(n, 0);
  values_.assign(n * cols(), 0.0);
}

std::size_t FeatureMatrix::count_label(int value) const {
  std::size_t n = 0;
  for (int l : labels_) n += (l == value);
  return n;
}

void FeatureMatrix::validate_finite() const {
  for (double v : values_)
    if (!std::isfinite(v))
      throw std::runtime_error("feature matrix contains a non-finite value");
}

void FeatureMatrix::write_csv(std::ostream& out, const std::string& config_echo) const {
  out << to_csv(config_echo);
}

std::string FeatureMatrix::to_csv(const std::string& config_echo) const {
  validate_finite();
  std::string out;
  out.reserve(64 * (rows() + 1));
  if (!config_echo.empty()) {
    out += "# config: ";
    out += config_echo;
    out += '\n';
  }
  out += "scenario,entity,window";
  for (const auto& c : schema_.columns) {
    out += ',';
    out += c.name;
  }
  out += ",label\n";
  for (std::size_t i = 0; i < rows(); ++i) {
    out += keys_[i].scenario;
    out += ',';
    out += keys_[i].entity.str();
    out += ',';
    out += std::to_string(keys_[i].window);
    auto r = row(i);
    for (double v : r) {
      out += ',';
      append_double(out, v);
    }
    out += ',';
    out += std::to_string(labels_[i]);
    out += '\n';
  }
  return out;
}

FeatureMatrix FeatureMatrix::read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;

  // header (skipping comment lines)
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    for (auto part : split_commas(line)) header.emplace_back(part);
    break;
  }
  if (header.size() < 5 || header[0] != "scenario" || header[1] != "entity" ||
      header[2] != "window" || header.back() != "label")
    throw std::runtime_error("feature CSV: unexpected header layout");

  FeatureSchema schema;
  for (std::size_t i = 3; i + 1 < header.size(); ++i)
    schema.columns.push_back({header[i], ""});
  FeatureMatrix m(std::move(schema));
  const std::size_t width = m.cols() + 4;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto parts = split_commas(line);
    if (parts.size() != width)
      throw std::runtime_error("feature CSV line " + std::to_string(line_no) +
                               ": expected " + std::to_string(width) + " fields");
    RowKey key;
    key.scenario = std::string(parts[0]);
    auto ip = IpAddr::parse(parts[1]);
    if (!ip)
      throw std::runtime_error("feature CSV line " + std::to_string(line_no) +
                               ": bad entity address");
    key.entity = *ip;
    {
      auto v = parts[2];
      auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), key.window);
      if (ec != std::errc{} || p != v.data() + v.size())
        throw std::runtime_error("feature CSV line " + std::to_string(line_no) +
                                 ": bad window index");
    }
    std::vector<double> values(m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j) {
      auto v = parts[3 + j];
      auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), values[j]);
      if (ec != std::errc{} || p != v.data() + v.size())
        throw std::runtime_error("feature CSV line " + std::to_string(line_no) +
                                 ": bad value in column " + m.schema().columns[j].name);
    }
    int label = -1;
    {
      auto v = parts.back();
      auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), label);
      if (ec != std::errc{} || p != v.data() + v.size() || (label != 0 && label != 1))
        throw std::runtime_error("feature CSV line " + std::to_string(line_no) +
                                 ": label must be 0 or 1");
    }
    m.add_row(std::move(key), values, label);
  }
  m.validate_finite();
  return m;
}

FeatureMatrix FeatureMatrix::read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open feature CSV: " + path);
  return read_csv(in);
}

FeatureMatrix concat_rows(const std::vector<const FeatureMatrix*>& parts) {
  if (parts.empty()) return {};
  FeatureMatrix out(parts.front()->schema());
  auto names = parts.front()->schema().names();
  for (const FeatureMatrix* part : parts) {
    if (part->schema().names() != names)
      throw std::runtime_error("cannot concatenate matrices with different schemas");
    for (std::size_t i = 0; i < part->rows(); ++i)
      out.add_row(part->keys()[i], part->row(i), part->labels()[i]);
  }
  return out;
}

}  // namespace botflow
