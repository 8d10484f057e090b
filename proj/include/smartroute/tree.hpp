#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "smartroute/dataset.hpp"
#include "smartroute/errors.hpp"
#include "smartroute/rng.hpp"

namespace smartroute {

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = 8;
  std::size_t min_samples_leaf = 20;
  std::size_t feature_subsample = 0;  // 0 = ceil(sqrt(d))
  bool bootstrap = true;
  std::uint64_t seed = 1;

  void validate() const {
    if (n_trees < 1) throw ConfigError("n_trees must be >= 1");
    if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
    if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
  }

  std::size_t resolved_subsample(std::size_t n_features) const {
    if (feature_subsample == 0) {
      return static_cast<std::size_t>(
          std::ceil(std::sqrt(static_cast<double>(n_features))));
    }
    return std::min(feature_subsample, n_features);
  }
};

struct TreeNode {
  bool is_leaf = true;
  int feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double pos_fraction = 0.0;  // leaf: positive-sample fraction
  std::size_t n_samples = 0;
  double impurity = 0.0;  // Gini at this node
};

struct TrainedTree {
  std::vector<TreeNode> nodes;

  // Leaf positive fraction for a feature vector: Prob(t_r).
  double predict(std::span<const double> x) const {
    if (nodes.empty()) throw ValidationError("empty tree");
    std::size_t idx = 0;
    while (!nodes[idx].is_leaf) {
      const TreeNode& n = nodes[idx];
      if (static_cast<std::size_t>(n.feature) >= x.size()) {
        throw SchemaError("feature vector narrower than tree expects");
      }
      idx = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold
                                         ? n.left
                                         : n.right);
    }
    return nodes[idx].pos_fraction;
  }
};

namespace detail {

inline double gini(std::size_t pos, std::size_t n) {
  if (n == 0) return 0.0;
  double p = static_cast<double>(pos) / static_cast<double>(n);
  return 2.0 * p * (1.0 - p);
}

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = -1.0;
};

// Best Gini-gain split over the candidate features, midpoint thresholds
// between sorted distinct values. Tie-break: first candidate in (feature,
// threshold) iteration order wins, keeping training deterministic.
inline SplitChoice best_split(const Dataset& ds, const std::vector<std::size_t>& samples,
                              const std::vector<std::size_t>& features,
                              std::size_t min_samples_leaf) {
  SplitChoice best;
  std::size_t n = samples.size();
  std::size_t pos_total = 0;
  for (std::size_t s : samples) pos_total += static_cast<std::size_t>(ds.labels[s]);
  double parent = gini(pos_total, n);

  std::vector<std::pair<double, int>> vals(n);
  for (std::size_t f : features) {
    for (std::size_t i = 0; i < n; ++i) {
      vals[i] = {ds.rows[samples[i]][f], ds.labels[samples[i]]};
    }
    std::sort(vals.begin(), vals.end());
    std::size_t left_n = 0, left_pos = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      ++left_n;
      left_pos += static_cast<std::size_t>(vals[i].second);
      if (vals[i].first == vals[i + 1].first) continue;  // no boundary here
      std::size_t right_n = n - left_n;
      if (left_n < min_samples_leaf || right_n < min_samples_leaf) continue;
      std::size_t right_pos = pos_total - left_pos;
      double child = (static_cast<double>(left_n) * gini(left_pos, left_n) +
                      static_cast<double>(right_n) * gini(right_pos, right_n)) /
                     static_cast<double>(n);
      double gain = parent - child;
      if (gain > best.gain) {
        best.found = true;
        best.gain = gain;
        best.feature = f;
        best.threshold = vals[i].first + (vals[i + 1].first - vals[i].first) / 2.0;
      }
    }
  }
  // Feasible zero-gain splits are accepted on impure nodes (gain >= 0);
  // pure nodes never reach here.
  if (best.found && best.gain < 0.0) best.found = false;
  return best;
}

inline std::vector<std::size_t> sample_features(std::size_t n_features, std::size_t k, Rng& rng) {
  std::vector<std::size_t> all(n_features);
  std::iota(all.begin(), all.end(), 0);
  if (k >= n_features) return all;
  // partial Fisher-Yates, then sort so candidate iteration order is stable
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(n_features - i));
    std::swap(all[i], all[j]);
  }
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

inline std::int32_t grow(const Dataset& ds, std::vector<std::size_t>& samples,
                         const ForestParams& params, std::size_t depth, Rng& rng,
                         std::vector<TreeNode>& nodes) {
  std::size_t n = samples.size();
  std::size_t pos = 0;
  for (std::size_t s : samples) pos += static_cast<std::size_t>(ds.labels[s]);

  TreeNode node;
  node.n_samples = n;
  node.impurity = gini(pos, n);
  node.pos_fraction = n == 0 ? 0.0 : static_cast<double>(pos) / static_cast<double>(n);

  bool stop = depth >= params.max_depth || pos == 0 || pos == n ||
              n < 2 * params.min_samples_leaf;
  detail::SplitChoice split;
  if (!stop) {
    auto features = sample_features(ds.n_features(), params.resolved_subsample(ds.n_features()), rng);
    split = best_split(ds, samples, features, params.min_samples_leaf);
    stop = !split.found;
  }

  std::int32_t my_idx = static_cast<std::int32_t>(nodes.size());
  nodes.push_back(node);
  if (stop) return my_idx;

  std::vector<std::size_t> left, right;
  left.reserve(n);
  right.reserve(n);
  for (std::size_t s : samples) {
    (ds.rows[s][split.feature] <= split.threshold ? left : right).push_back(s);
  }
  samples.clear();
  samples.shrink_to_fit();

  std::int32_t l = grow(ds, left, params, depth + 1, rng, nodes);
  std::int32_t r = grow(ds, right, params, depth + 1, rng, nodes);
  nodes[static_cast<std::size_t>(my_idx)].is_leaf = false;
  nodes[static_cast<std::size_t>(my_idx)].feature = static_cast<int>(split.feature);
  nodes[static_cast<std::size_t>(my_idx)].threshold = split.threshold;
  nodes[static_cast<std::size_t>(my_idx)].left = l;
  nodes[static_cast<std::size_t>(my_idx)].right = r;
  return my_idx;
}

}  // namespace detail

// CART with Gini impurity. Deterministic for a given rng state.
inline TrainedTree train_tree(const Dataset& ds, const ForestParams& params, Rng& rng) {
  params.validate();
  ds.validate();
  if (ds.rows.empty()) throw ValidationError("cannot train a tree on an empty dataset");
  std::vector<std::size_t> samples(ds.rows.size());
  std::iota(samples.begin(), samples.end(), 0);
  TrainedTree tree;
  detail::grow(ds, samples, params, 0, rng, tree.nodes);
  return tree;
}

}  // namespace smartroute
