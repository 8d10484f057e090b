#pragma once

// Shared fixtures for the test suites.

#include <string>
#include <vector>

#include "smartroute/feature_store.hpp"
#include "smartroute/forest.hpp"
#include "smartroute/logistic.hpp"
#include "smartroute/rng.hpp"

namespace testutil {

using namespace smartroute;

inline PaymentRequest request(const std::string& id, TimestampMs ts, Method m = Method::card,
                              const std::string& bank = "bankA",
                              const std::string& merchant = "m1") {
  return PaymentRequest{id, ts, merchant, m, bank, "visa", 500, {}};
}

inline Outcome outcome_for(const PaymentRequest& req, const std::string& terminal_id,
                           OutcomeStatus status) {
  return Outcome{req.payment_id, terminal_id, status, req.timestamp};
}

// A leaf-only tree predicting a constant positive fraction.
inline TrainedTree constant_tree(double pos_fraction) {
  TrainedTree t;
  TreeNode n;
  n.is_leaf = true;
  n.pos_fraction = pos_fraction;
  n.n_samples = 1;
  t.nodes.push_back(n);
  return t;
}

// One split on `feature`: value <= threshold -> low leaf, else high leaf.
inline TrainedTree step_tree(std::size_t feature, double threshold, double low, double high) {
  TrainedTree t;
  TreeNode root;
  root.is_leaf = false;
  root.feature = static_cast<int>(feature);
  root.threshold = threshold;
  root.left = 1;
  root.right = 2;
  root.n_samples = 2;
  root.impurity = 0.5;
  t.nodes.push_back(root);
  TreeNode l, r;
  l.is_leaf = r.is_leaf = true;
  l.pos_fraction = low;
  r.pos_fraction = high;
  l.n_samples = r.n_samples = 1;
  t.nodes.push_back(l);
  t.nodes.push_back(r);
  return t;
}

// Forest that votes positive when `feature` exceeds the thresholds; strictly
// monotone in that feature, handy for end-to-end checks without training.
inline TrainedForest monotone_forest(const FeatureStore& store, std::size_t feature,
                                     std::vector<double> thresholds = {0.35, 0.55, 0.75}) {
  TrainedForest f;
  f.feature_names = store.feature_names();
  f.feature_indices.clear();
  for (std::size_t i = 0; i < f.feature_names.size(); ++i) f.feature_indices.push_back(i);
  f.store_schema_id = store.schema_id();
  f.params.n_trees = thresholds.size();
  for (double th : thresholds) f.trees.push_back(step_tree(feature, th, 0.1, 0.9));
  return f;
}

// Logistic downtime detector that flags gateways whose features sit low;
// weights are negative so probability of "down" rises as features fall.
// Centered at 0.2 so ordinary mediocre gateways stay healthy and only a
// near-total collapse reads as an outage.
inline TrainedLogistic handmade_downtime_logistic(const FeatureStore& store, double weight = -6.0,
                                                  double center = 0.2) {
  TrainedLogistic m;
  m.feature_names = store.gateway_feature_names();
  m.feature_indices.clear();
  for (std::size_t i = 0; i < m.feature_names.size(); ++i) m.feature_indices.push_back(i);
  m.store_schema_id = store.gateway_schema_id();
  m.weights.assign(m.feature_names.size(), weight);
  m.means.assign(m.feature_names.size(), center);
  m.scales.assign(m.feature_names.size(), 1.0);
  m.bias = 0.0;
  return m;
}

}  // namespace testutil
