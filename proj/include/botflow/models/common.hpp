#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace botflow::models {

/// splitmix64. All randomized training flows through this so results do
/// not depend on standard-library distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// [0, n)
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  double exponential(double rate) {
    return -std::log1p(-uniform()) / rate;
  }

  double normal(double mean, double stdev) {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return mean + stdev * std::sqrt(-2.0 * std::log(u1)) *
                      std::cos(6.283185307179586 * u2);
  }

  /// Independent deterministic substream, e.g. one per tree.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    Rng r(seed ^ (0x632BE59BD9B4E019ull + stream * 0x9E3779B97F4A7C15ull));
    r.next();
    return r.next();
  }

 private:
  std::uint64_t state_;
};

enum class ModelFamily { logreg, random_forest, gradient_boosting };

std::optional<ModelFamily> parse_model_family(std::string_view text);
std::string_view model_family_name(ModelFamily family);

enum class FeatureRule { sqrt_rule, all };

struct HyperParams {
  ModelFamily family = ModelFamily::random_forest;
  // logreg
  double l1_strength = 0.01;
  // random forest
  int n_trees = 100;
  FeatureRule features_per_split = FeatureRule::sqrt_rule;
  // gradient boosting
  int n_estimators = 100;
  double learning_rate = 0.05;
  // shared by both tree families (forest default 12, boosting default 3)
  int max_depth = 12;
  bool class_weighted = false;
  std::uint64_t seed = 0;

  static HyperParams logreg(double l1, std::uint64_t seed = 0);
  static HyperParams random_forest(int trees = 100, int depth = 12,
                                   std::uint64_t seed = 0);
  static HyperParams gradient_boosting(int estimators = 100, int depth = 3,
                                       double lr = 0.05,
                                       std::uint64_t seed = 0);

  void validate() const;  // throws on out-of-range values
};

/// Borrowed view of a dense row-major matrix with binary labels.
struct Dataset {
  const double* x = nullptr;
  const int* y = nullptr;
  std::size_t n = 0;
  std::size_t d = 0;

  double at(std::size_t i, std::size_t j) const { return x[i * d + j]; }
  std::span<const double> row(std::size_t i) const { return {x + i * d, d}; }
};

}  // namespace botflow::models
