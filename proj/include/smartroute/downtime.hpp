#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "smartroute/errors.hpp"
#include "smartroute/feature_store.hpp"
#include "smartroute/logistic.hpp"
#include "smartroute/rules.hpp"

namespace smartroute {

// Logistic gateway-downtime detector over the store's gateway-level
// feature sub-vector.
struct DowntimeModel {
  TrainedLogistic model;  // store_schema_id == the store's gateway_schema_id
  double threshold = 0.5;

  void validate() const {
    if (threshold <= 0.0 || threshold >= 1.0) {
      throw ConfigError("downtime threshold must be in (0, 1)");
    }
  }
};

inline bool predict_gateway_down(const DowntimeModel& m, const FeatureStore& store,
                                 const std::string& gateway_id, TimestampMs ts) {
  FeatureVector v = store.gateway_feature_vector(gateway_id, ts);
  return logistic_probability(m.model, v) > m.threshold;  // strict: p == threshold is healthy
}

struct StaticFilterResult {
  std::vector<Terminal> terminals;
  bool degraded = false;  // downtime filter emptied the list; rule-filtered list returned
};

// Stage 1 of routing: business rules, then gateway-downtime removal. If
// downtime filtering would leave nothing, fall back to the rule-filtered
// list and flag degraded mode; refusing every payment is worse than a
// best-effort attempt.
inline StaticFilterResult static_filter(const PaymentRequest& request,
                                        std::span<const Terminal> terminals, const RuleSet& rules,
                                        const DowntimeModel* downtime, const FeatureStore& store,
                                        TimestampMs ts) {
  std::vector<Terminal> eligible = apply_rules(rules, request, terminals);
  if (eligible.empty()) {
    throw NoEligibleTerminalsError("no eligible terminals for payment '" + request.payment_id +
                                   "' after rule filtering");
  }
  if (downtime == nullptr) return {std::move(eligible), false};

  std::set<std::string> down;
  std::set<std::string> seen;
  for (const auto& t : eligible) {
    if (!seen.insert(t.gateway_id).second) continue;
    if (predict_gateway_down(*downtime, store, t.gateway_id, ts)) down.insert(t.gateway_id);
  }
  StaticFilterResult result;
  for (const auto& t : eligible) {
    if (!down.count(t.gateway_id)) result.terminals.push_back(t);
  }
  if (result.terminals.empty()) {
    result.terminals = std::move(eligible);
    result.degraded = true;
  }
  return result;
}

}  // namespace smartroute
