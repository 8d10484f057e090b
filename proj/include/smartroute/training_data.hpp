#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "smartroute/dataset.hpp"
#include "smartroute/errors.hpp"
#include "smartroute/feature_store.hpp"
#include "smartroute/txlog.hpp"

namespace smartroute {

struct ReplayOptions {
  bool strict_order = false;  // reject unsorted logs instead of sorting
};

// Ground-truth downtime interval, [start_ts, end_ts) in milliseconds.
struct OutageLabel {
  std::string gateway_id;
  TimestampMs start_ts = 0;
  TimestampMs end_ts = 0;

  bool covers(const std::string& gateway, TimestampMs ts) const {
    return gateway == gateway_id && ts >= start_ts && ts < end_ts;
  }
};

namespace detail {

inline std::vector<TxRecord> ordered_records(std::vector<TxRecord> records,
                                             const ReplayOptions& opts) {
  bool sorted = std::is_sorted(records.begin(), records.end(),
                               [](const TxRecord& a, const TxRecord& b) { return a.ts < b.ts; });
  if (!sorted) {
    if (opts.strict_order) throw ValidationError("transaction log is not sorted by timestamp");
    std::stable_sort(records.begin(), records.end(),
                     [](const TxRecord& a, const TxRecord& b) { return a.ts < b.ts; });
  }
  return records;
}

inline void register_from_record(FeatureStore& store, const TxRecord& r) {
  if (store.has_terminal(r.terminal_id)) {
    Terminal t = store.terminal(r.terminal_id);
    if (!t.supports(r.method)) {
      t.supported_methods.insert(r.method);
      store.register_terminal(t);
    }
    return;
  }
  Terminal t{r.terminal_id, r.gateway_id, {r.method}, true};
  store.register_terminal(t);
}

}  // namespace detail

// Replay the log in time order against a fresh store. For every attempt the
// feature vector is captured BEFORE its feedback is applied, so row i can
// not depend on outcome i or anything later. Customer failures contribute
// neither rows nor feedback.
inline Dataset build_training_set(std::vector<TxRecord> records,
                                  const std::vector<FeatureTemplate>& templates, double alpha,
                                  const ReplayOptions& opts = {}) {
  records = detail::ordered_records(std::move(records), opts);
  FeatureStore store(templates, alpha);
  Dataset ds;
  ds.schema_id = store.schema_id();
  ds.feature_names = store.feature_names();
  for (std::size_t i = 0; i < ds.feature_names.size(); ++i) ds.feature_indices.push_back(i);

  for (const auto& r : records) {
    if (r.status == TxStatus::failed_to_route) continue;
    detail::register_from_record(store, r);
    PaymentRequest req = r.request();
    if (r.status != TxStatus::customer_failure) {
      FeatureVector v = store.feature_vector(req, r.terminal_id, r.ts);
      ds.rows.push_back(std::move(v.values));
      ds.labels.push_back(r.status == TxStatus::success ? 1 : 0);
    }
    store.apply_feedback(req, r.terminal_id, r.outcome());
  }
  return ds;
}

// Same replay, but rows are the attempted gateway's feature sub-vector and
// the label is whether that gateway was inside an injected outage window.
inline Dataset build_downtime_training_set(std::vector<TxRecord> records,
                                           const std::vector<FeatureTemplate>& templates,
                                           double alpha, const std::vector<OutageLabel>& outages,
                                           const ReplayOptions& opts = {}) {
  records = detail::ordered_records(std::move(records), opts);
  FeatureStore store(templates, alpha);
  Dataset ds;
  ds.schema_id = store.gateway_schema_id();
  ds.feature_names = store.gateway_feature_names();
  for (std::size_t i = 0; i < ds.feature_names.size(); ++i) ds.feature_indices.push_back(i);
  if (ds.feature_names.empty()) {
    throw ConfigError("schema has no gateway-level templates; cannot build downtime dataset");
  }

  for (const auto& r : records) {
    if (r.status == TxStatus::failed_to_route) continue;
    detail::register_from_record(store, r);
    FeatureVector v = store.gateway_feature_vector(r.gateway_id, r.ts);
    int label = 0;
    for (const auto& o : outages) {
      if (o.covers(r.gateway_id, r.ts)) {
        label = 1;
        break;
      }
    }
    ds.rows.push_back(std::move(v.values));
    ds.labels.push_back(label);
    store.apply_feedback(r.request(), r.terminal_id, r.outcome());
  }
  return ds;
}

// Rebuild a store by applying every attempt's feedback in order; the
// offline twin of live serving. Terminals known upfront (from config or a
// prior snapshot) are registered first so the registry matches a live
// store; records can still introduce additional ones.
inline FeatureStore replay_store(std::vector<TxRecord> records,
                                 const std::vector<FeatureTemplate>& templates, double alpha,
                                 std::span<const Terminal> initial_terminals = {},
                                 const ReplayOptions& opts = {}) {
  records = detail::ordered_records(std::move(records), opts);
  FeatureStore store(templates, alpha);
  for (const auto& t : initial_terminals) store.register_terminal(t);
  for (const auto& r : records) {
    if (r.status == TxStatus::failed_to_route) continue;
    detail::register_from_record(store, r);
    store.apply_feedback(r.request(), r.terminal_id, r.outcome());
  }
  return store;
}

}  // namespace smartroute
