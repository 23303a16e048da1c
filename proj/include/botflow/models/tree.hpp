#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "botflow/models/common.hpp"

namespace botflow::models {

/// Flat binary tree; leaves have feature == -1 and carry `value`.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> row) const {
    std::int32_t i = 0;
    while (nodes[i].feature >= 0)
      i = row[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left
                                                      : nodes[i].right;
    return nodes[i].value;
  }

  int depth() const;
  bool empty() const { return nodes.empty(); }
};

struct CartParams {
  int max_depth = 12;
  int features_per_split = 0;  // 0: all features
  /// Nodes at or below this impurity become leaves. Impure nodes accept
  /// the best split even at zero gain (XOR-style structure is invisible
  /// to first-order gain at the root).
  double min_impurity = 1e-12;
};

/// Gini CART classifier tree over a sample index multiset (bootstrap
/// indices may repeat rows). Split candidates are midpoints between
/// consecutive sorted unique feature values; leaves hold the weighted
/// positive fraction. When importance_acc is given, each split adds its
/// weighted impurity decrease to the split feature's slot.
Tree build_cart_tree(const Dataset& data,
                     std::span<const std::uint32_t> sample_idx,
                     std::span<const double, 2> class_weight,
                     const CartParams& params, Rng& rng,
                     std::vector<double>* importance_acc);

/// Per-feature sample orderings computed once per matrix; feature values
/// never change across boosting rounds, so all trees share this.
class Presorted {
 public:
  explicit Presorted(const Dataset& data);
  std::span<const std::uint32_t> order(std::size_t f) const {
    return {order_.data() + f * n_, n_};
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint32_t> order_;
};

struct RegTreeParams {
  int max_depth = 3;
  /// Minimum weighted residual sum of squares to keep splitting.
  double min_impurity = 1e-12;
  double max_leaf_value = 20.0;
};

/// Level-wise least-squares regression tree on per-sample targets with
/// Newton leaf values sum(w*g)/sum(w*h). Uses every feature at every
/// node; the per-level scans walk each presorted feature order once and
/// dispatch samples to their current node, so cost is O(d*n) per level.
/// When leaf_of is given it receives each sample's final leaf node id.
Tree build_regression_tree(const Dataset& data, const Presorted& presorted,
                           std::span<const double> grad,
                           std::span<const double> hess,
                           std::span<const double> weight,
                           const RegTreeParams& params,
                           std::vector<double>* importance_acc,
                           std::vector<std::int32_t>* leaf_of);

}  // namespace botflow::models
