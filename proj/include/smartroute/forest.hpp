#pragma once

#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "smartroute/dataset.hpp"
#include "smartroute/errors.hpp"
#include "smartroute/feature_store.hpp"
#include "smartroute/tree.hpp"

namespace smartroute {

// Bagging ensemble. The ensemble probability is the fraction of trees whose
// leaf positive fraction exceeds 0.5, so outputs are multiples of 1/n_trees.
struct TrainedForest {
  std::vector<TrainedTree> trees;
  std::vector<std::string> feature_names;
  std::vector<std::size_t> feature_indices;  // into the store schema vector
  std::string store_schema_id;
  ForestParams params;

  std::size_t n_trees() const { return trees.size(); }

  double probability_raw(std::span<const double> projected) const {
    if (trees.empty()) throw ValidationError("empty forest");
    std::size_t votes = 0;
    for (const auto& t : trees) {
      if (t.predict(projected) > 0.5) ++votes;
    }
    return static_cast<double>(votes) / static_cast<double>(trees.size());
  }

  // Project a full store vector down to this model's columns.
  std::vector<double> project(const FeatureVector& v) const {
    if (v.schema_id != store_schema_id) {
      throw SchemaError("feature vector schema '" + v.schema_id +
                        "' does not match model schema '" + store_schema_id + "'");
    }
    std::vector<double> out;
    out.reserve(feature_indices.size());
    for (std::size_t idx : feature_indices) {
      if (idx >= v.values.size()) throw SchemaError("feature index out of range for vector");
      out.push_back(v.values[idx]);
    }
    return out;
  }
};

inline double forest_probability(const TrainedForest& f, const FeatureVector& v) {
  return f.probability_raw(f.project(v));
}

inline TrainedForest train_forest(const Dataset& ds, const ForestParams& params) {
  params.validate();
  ds.validate();
  if (ds.rows.empty()) throw ValidationError("cannot train a forest on an empty dataset");

  TrainedForest forest;
  forest.feature_names = ds.feature_names;
  forest.feature_indices = ds.feature_indices;
  forest.store_schema_id = ds.schema_id;
  forest.params = params;
  forest.trees.reserve(params.n_trees);

  for (std::size_t t = 0; t < params.n_trees; ++t) {
    Rng rng(mix64(params.seed, 0x7265737400ULL + t));
    if (params.bootstrap) {
      Dataset sample;
      sample.schema_id = ds.schema_id;
      sample.feature_names = ds.feature_names;
      sample.feature_indices = ds.feature_indices;
      sample.rows.reserve(ds.rows.size());
      sample.labels.reserve(ds.rows.size());
      for (std::size_t i = 0; i < ds.rows.size(); ++i) {
        std::size_t j = static_cast<std::size_t>(rng.below(ds.rows.size()));
        sample.rows.push_back(ds.rows[j]);
        sample.labels.push_back(ds.labels[j]);
      }
      forest.trees.push_back(train_tree(sample, params, rng));
    } else {
      forest.trees.push_back(train_tree(ds, params, rng));
    }
  }
  return forest;
}

// Per-feature importance: sample-weighted Gini decrease summed over the
// nodes that split on the feature, averaged over trees, normalized to sum 1.
inline std::vector<double> impurity_importance(const TrainedForest& f) {
  if (f.trees.empty()) throw ValidationError("empty forest");
  std::size_t d = f.feature_names.size();
  std::vector<double> total(d, 0.0);
  for (const auto& tree : f.trees) {
    if (tree.nodes.empty()) continue;
    double n_root = static_cast<double>(tree.nodes[0].n_samples);
    if (n_root == 0.0) continue;
    std::vector<double> per_tree(d, 0.0);
    for (const auto& node : tree.nodes) {
      if (node.is_leaf) continue;
      const auto& l = tree.nodes[static_cast<std::size_t>(node.left)];
      const auto& r = tree.nodes[static_cast<std::size_t>(node.right)];
      double decrease = static_cast<double>(node.n_samples) * node.impurity -
                        static_cast<double>(l.n_samples) * l.impurity -
                        static_cast<double>(r.n_samples) * r.impurity;
      per_tree[static_cast<std::size_t>(node.feature)] += decrease / n_root;
    }
    for (std::size_t i = 0; i < d; ++i) total[i] += per_tree[i];
  }
  for (double& v : total) v /= static_cast<double>(f.trees.size());
  double sum = std::accumulate(total.begin(), total.end(), 0.0);
  if (sum > 0.0) {
    for (double& v : total) v /= sum;
  }
  return total;
}

}  // namespace smartroute
