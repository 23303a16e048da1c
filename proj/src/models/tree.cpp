#include "botflow/models/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace botflow::models {

namespace {

/// Midpoint between consecutive sorted values; falls back to the lower
/// value when rounding would land on the upper one, so the partition
/// predicate x <= thr stays consistent with the scan.
double split_threshold(double lo, double hi) {
  double mid = lo + 0.5 * (hi - lo);
  if (!(mid >= lo) || mid >= hi) return lo;
  return mid;
}

struct SplitChoice {
  double gain = 0.0;
  std::int32_t feature = -1;
  double threshold = 0.0;

  bool beats(const SplitChoice& other) const {
    if (feature < 0) return false;
    if (other.feature < 0) return true;
    if (gain != other.gain) return gain > other.gain;
    if (feature != other.feature) return feature < other.feature;
    return threshold < other.threshold;
  }
};

double gini(double wp, double wn) {
  double w = wp + wn;
  if (w <= 0) return 0.0;
  double pp = wp / w, pn = wn / w;
  return 1.0 - pp * pp - pn * pn;
}

struct CartBuilder {
  const Dataset& data;
  const CartParams& params;
  std::span<const double, 2> class_weight;
  Rng& rng;
  std::vector<double>* importance;

  std::vector<std::uint32_t> idx;        // working sample multiset
  std::vector<std::uint32_t> feat_perm;  // partially shuffled each node
  std::vector<std::pair<double, std::uint8_t>> scratch;
  std::vector<TreeNode> nodes;
  double root_weight = 0.0;

  std::int32_t build(std::size_t lo, std::size_t hi, int depth) {
    double wp = 0.0, wn = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      int y = data.y[idx[i]];
      (y ? wp : wn) += class_weight[y];
    }
    const double w = wp + wn;
    const std::int32_t id = static_cast<std::int32_t>(nodes.size());
    nodes.push_back({});
    nodes[id].value = w > 0 ? wp / w : 0.0;

    const double parent_impurity = gini(wp, wn);
    if (depth >= params.max_depth || hi - lo < 2 ||
        parent_impurity <= params.min_impurity)
      return id;

    const std::size_t d = data.d;
    std::size_t k = params.features_per_split > 0
                        ? std::min<std::size_t>(params.features_per_split, d)
                        : d;
    for (std::size_t j = 0; j < k; ++j) {
      std::size_t swap_with = j + rng.below(d - j);
      std::swap(feat_perm[j], feat_perm[swap_with]);
    }

    SplitChoice best;
    for (std::size_t j = 0; j < k; ++j) {
      const std::uint32_t f = feat_perm[j];
      scratch.clear();
      for (std::size_t i = lo; i < hi; ++i)
        scratch.emplace_back(data.at(idx[i], f),
                             static_cast<std::uint8_t>(data.y[idx[i]]));
      std::sort(scratch.begin(), scratch.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });

      double lwp = 0.0, lwn = 0.0;
      for (std::size_t i = 1; i < scratch.size(); ++i) {
        (scratch[i - 1].second ? lwp : lwn) += class_weight[scratch[i - 1].second];
        if (scratch[i].first <= scratch[i - 1].first) continue;
        double lw = lwp + lwn, rw = w - lw;
        double gain = parent_impurity - (lw / w) * gini(lwp, lwn) -
                      (rw / w) * gini(wp - lwp, wn - lwn);
        SplitChoice cand{std::max(gain, 0.0), static_cast<std::int32_t>(f),
                         split_threshold(scratch[i - 1].first, scratch[i].first)};
        if (cand.beats(best)) best = cand;
      }
    }

    if (best.feature < 0) return id;

    auto mid_it = std::partition(idx.begin() + lo, idx.begin() + hi,
                                 [&](std::uint32_t i) {
                                   return data.at(i, best.feature) <= best.threshold;
                                 });
    std::size_t mid = static_cast<std::size_t>(mid_it - idx.begin());
    if (mid == lo || mid == hi) return id;  // degenerate, keep as leaf

    if (importance)
      (*importance)[best.feature] += (w / root_weight) * best.gain;

    nodes[id].feature = best.feature;
    nodes[id].threshold = best.threshold;
    std::int32_t left = build(lo, mid, depth + 1);
    std::int32_t right = build(mid, hi, depth + 1);
    nodes[id].left = left;
    nodes[id].right = right;
    return id;
  }
};

}  // namespace

int Tree::depth() const {
  if (nodes.empty()) return 0;
  int best = 0;
  // iterative DFS with explicit depth
  std::vector<std::pair<std::int32_t, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, depth] = stack.back();
    stack.pop_back();
    if (nodes[i].feature < 0) {
      best = std::max(best, depth);
      continue;
    }
    stack.push_back({nodes[i].left, depth + 1});
    stack.push_back({nodes[i].right, depth + 1});
  }
  return best;
}

Tree build_cart_tree(const Dataset& data,
                     std::span<const std::uint32_t> sample_idx,
                     std::span<const double, 2> class_weight,
                     const CartParams& params, Rng& rng,
                     std::vector<double>* importance_acc) {
  if (sample_idx.empty()) throw std::invalid_argument("cart: empty sample");
  CartBuilder b{data, params, class_weight, rng, importance_acc,
                std::vector<std::uint32_t>(sample_idx.begin(), sample_idx.end()),
                std::vector<std::uint32_t>(data.d),
                {},
                {},
                0.0};
  std::iota(b.feat_perm.begin(), b.feat_perm.end(), 0u);
  for (std::uint32_t i : sample_idx) b.root_weight += class_weight[data.y[i]];
  b.scratch.reserve(sample_idx.size());
  b.nodes.reserve(64);
  b.build(0, b.idx.size(), 0);
  return Tree{std::move(b.nodes)};
}

Presorted::Presorted(const Dataset& data) : n_(data.n), order_(data.d * data.n) {
  std::vector<std::uint32_t> base(n_);
  std::iota(base.begin(), base.end(), 0u);
#pragma omp parallel for schedule(dynamic, 8)
  for (long f = 0; f < static_cast<long>(data.d); ++f) {
    std::uint32_t* out = order_.data() + static_cast<std::size_t>(f) * n_;
    std::copy(base.begin(), base.end(), out);
    std::stable_sort(out, out + n_, [&](std::uint32_t a, std::uint32_t b) {
      return data.at(a, f) < data.at(b, f);
    });
  }
}

namespace {

struct RegNode {
  std::int32_t tree_id = -1;
  double sum_w = 0.0, sum_wg = 0.0, sum_wg2 = 0.0, sum_wh = 0.0;
  std::size_t count = 0;
  SplitChoice best;

  /// Weighted residual sum of squares around the node mean.
  double impurity() const {
    return sum_w > 0 ? sum_wg2 - sum_wg * sum_wg / sum_w : 0.0;
  }
};

struct ScanState {
  double left_w = 0.0, left_wg = 0.0;
  std::size_t left_cnt = 0;
  double last = 0.0;
  bool seen = false;
};

double reg_gain(double lw, double lg, double w, double g) {
  double rw = w - lw, rg = g - lg;
  if (lw <= 0.0 || rw <= 0.0) return -1.0;
  return lg * lg / lw + rg * rg / rw - g * g / w;
}

}  // namespace

Tree build_regression_tree(const Dataset& data, const Presorted& presorted,
                           std::span<const double> grad,
                           std::span<const double> hess,
                           std::span<const double> weight,
                           const RegTreeParams& params,
                           std::vector<double>* importance_acc,
                           std::vector<std::int32_t>* leaf_of) {
  const std::size_t n = data.n;
  const std::size_t d = data.d;
  if (n == 0) throw std::invalid_argument("regression tree: empty data");

  Tree tree;
  tree.nodes.push_back({});

  // position[i]: tree node currently containing sample i
  std::vector<std::int32_t> position(n, 0);
  // slot_of[node]: index into `active` for this level, or -1
  std::vector<std::int32_t> slot_of(1, 0);

  std::vector<RegNode> active(1);
  active[0].tree_id = 0;
  for (std::size_t i = 0; i < n; ++i) {
    active[0].sum_w += weight[i];
    active[0].sum_wg += weight[i] * grad[i];
    active[0].sum_wg2 += weight[i] * grad[i] * grad[i];
    active[0].sum_wh += weight[i] * hess[i];
    active[0].count += 1;
  }
  const double root_w = active[0].sum_w;

  auto leaf_value = [&](const RegNode& node) {
    double denom = std::max(node.sum_wh, 1e-12);
    double v = node.sum_wg / denom;
    return std::clamp(v, -params.max_leaf_value, params.max_leaf_value);
  };

  for (int depth = 0; depth <= params.max_depth; ++depth) {
    if (active.empty()) break;
    const bool last_level = depth == params.max_depth;

    std::vector<char> splittable(active.size());
    for (std::size_t s = 0; s < active.size(); ++s)
      splittable[s] = active[s].count >= 2 &&
                      active[s].impurity() > params.min_impurity;

    if (!last_level) {
      // Split search: walk each feature's presorted order once,
      // dispatching samples to their node's scan state. Features are
      // independent, so the loop parallelizes; the merge below runs in
      // ascending feature order to stay deterministic.
      std::vector<SplitChoice> per_feature(d * active.size());
#pragma omp parallel
      {
        std::vector<ScanState> scan(active.size());
#pragma omp for schedule(dynamic, 4)
        for (long f = 0; f < static_cast<long>(d); ++f) {
          std::fill(scan.begin(), scan.end(), ScanState{});
          SplitChoice* best_here = per_feature.data() + static_cast<std::size_t>(f) * active.size();
          for (std::uint32_t i : presorted.order(f)) {
            std::int32_t node_id = position[i];
            std::int32_t s = node_id >= 0 ? slot_of[node_id] : -1;
            if (s < 0 || !splittable[s]) continue;
            ScanState& st = scan[s];
            const double v = data.at(i, f);
            if (st.seen && v > st.last && st.left_cnt >= 1 &&
                st.left_cnt < active[s].count) {
              double gain = reg_gain(st.left_w, st.left_wg, active[s].sum_w,
                                     active[s].sum_wg);
              SplitChoice cand{std::max(gain, 0.0), static_cast<std::int32_t>(f),
                               split_threshold(st.last, v)};
              if (cand.beats(best_here[s])) best_here[s] = cand;
            }
            st.left_w += weight[i];
            st.left_wg += weight[i] * grad[i];
            st.left_cnt += 1;
            st.last = v;
            st.seen = true;
          }
        }
      }
      for (std::size_t f = 0; f < d; ++f)
        for (std::size_t s = 0; s < active.size(); ++s) {
          const SplitChoice& cand = per_feature[f * active.size() + s];
          if (cand.feature >= 0 && cand.beats(active[s].best)) active[s].best = cand;
        }
    }

    // Apply splits (or finalize leaves) in ascending node order.
    std::vector<RegNode> next;
    std::vector<std::int32_t> next_slot(tree.nodes.size() + 2 * active.size(), -1);
    for (std::size_t s = 0; s < active.size(); ++s) {
      RegNode& node = active[s];
      TreeNode& tn = tree.nodes[node.tree_id];
      if (last_level || !splittable[s] || node.best.feature < 0) {
        tn.value = leaf_value(node);
        continue;
      }
      if (importance_acc)
        (*importance_acc)[node.best.feature] += (node.sum_w / root_w) * node.best.gain;
      tn.feature = node.best.feature;
      tn.threshold = node.best.threshold;
      tn.left = static_cast<std::int32_t>(tree.nodes.size());
      tn.right = tn.left + 1;
      tree.nodes.push_back({});
      tree.nodes.push_back({});
      RegNode l, r;
      l.tree_id = tn.left;
      r.tree_id = tn.right;
      next_slot[tn.left] = static_cast<std::int32_t>(next.size());
      next.push_back(l);
      next_slot[tn.right] = static_cast<std::int32_t>(next.size());
      next.push_back(r);
    }
    if (next.empty()) break;

    // Reposition samples and accumulate child sums in index order.
    for (std::size_t i = 0; i < n; ++i) {
      std::int32_t node_id = position[i];
      if (node_id < 0) continue;
      const TreeNode& tn = tree.nodes[node_id];
      if (tn.feature < 0) {
        position[i] = -1;  // settled in a finished leaf
        continue;
      }
      std::int32_t child = data.at(i, tn.feature) <= tn.threshold ? tn.left : tn.right;
      position[i] = child;
      std::int32_t s = next_slot[child];
      next[s].sum_w += weight[i];
      next[s].sum_wg += weight[i] * grad[i];
      next[s].sum_wg2 += weight[i] * grad[i] * grad[i];
      next[s].sum_wh += weight[i] * hess[i];
      next[s].count += 1;
    }
    active = std::move(next);
    slot_of.assign(tree.nodes.size(), -1);
    for (std::size_t s = 0; s < active.size(); ++s) slot_of[active[s].tree_id] = static_cast<std::int32_t>(s);
  }

  if (leaf_of) {
    // make sure every sample points at its final leaf (root-only trees
    // and early-settled samples)
    for (std::size_t i = 0; i < n; ++i) {
      std::int32_t node_id = 0;
      while (tree.nodes[node_id].feature >= 0) {
        const TreeNode& tn = tree.nodes[node_id];
        node_id = data.at(i, tn.feature) <= tn.threshold ? tn.left : tn.right;
      }
      (*leaf_of)[i] = node_id;
    }
  }
  return tree;
}

}  // namespace botflow::models
