#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "botflow/ip.hpp"
#include "botflow/schema.hpp"

namespace botflow {

struct RowKey {
  std::string scenario;
  IpAddr entity;
  std::int64_t window = 0;

  auto operator<=>(const RowKey&) const = default;
};

/// Dense row-major matrix with named columns and one key and binary
/// label per row.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(FeatureSchema schema) : schema_(std::move(schema)) {}

  std::size_t rows() const { return keys_.size(); }
  std::size_t cols() const { return schema_.size(); }
  const FeatureSchema& schema() const { return schema_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * cols(), cols()};
  }
  std::span<double> row(std::size_t i) {
    return {values_.data() + i * cols(), cols()};
  }

  const std::vector<RowKey>& keys() const { return keys_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<double>& values() const { return values_; }

  RowKey& key(std::size_t i) { return keys_[i]; }
  int& label(std::size_t i) { return labels_[i]; }

  void add_row(RowKey key, std::span<const double> values, int label);
  /// Preallocates n zero rows so parallel writers can fill fixed slots.
  void resize_rows(std::size_t n);

  std::size_t count_label(int value) const;
  /// Throws if any value is NaN or infinite.
  void validate_finite() const;

  /// CSV layout: optional `# config: ...` comment, then a header row
  /// `scenario,entity,window,<column names...>,label`, then data rows.
  void write_csv(std::ostream& out, const std::string& config_echo = "") const;
  std::string to_csv(const std::string& config_echo = "") const;
  static FeatureMatrix read_csv(std::istream& in);
  static FeatureMatrix read_csv_file(const std::string& path);

 private:
  FeatureSchema schema_;
  std::vector<RowKey> keys_;
  std::vector<int> labels_;
  std::vector<double> values_;
};

/// Row-wise concatenation; schemas must agree by name.
FeatureMatrix concat_rows(const std::vector<const FeatureMatrix*>& parts);

}  // namespace botflow
