#pragma once

#include <algorithm>
#include <atomic>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "smartroute/core.hpp"
#include "smartroute/downtime.hpp"
#include "smartroute/errors.hpp"
#include "smartroute/feature_store.hpp"
#include "smartroute/forest.hpp"
#include "smartroute/rules.hpp"

namespace smartroute {

struct ScoredTerminal {
  Terminal terminal;
  double probability = 0.0;  // multiple of 1/n_trees for the active forest
};

// Ranked terminal list for one payment, plus the retry cursor. Retries walk
// the list in order; the scorer is never consulted again for this payment.
struct RouteDecision {
  std::string request_id;
  std::vector<ScoredTerminal> ranked;  // probability desc, terminal_id asc
  std::size_t attempt_cursor = 0;
  std::size_t max_attempts = 0;  // min(ranked size, max_retries + 1)
  bool degraded = false;
  TimestampMs created_at = 0;
  std::vector<bool> recorded;  // per ranked entry: outcome already fed back

  // Terminal to try next; advances the cursor. nullopt = exhausted.
  std::optional<ScoredTerminal> next_terminal() {
    if (attempt_cursor >= max_attempts) return std::nullopt;
    return ranked[attempt_cursor++];
  }

  std::size_t index_of(const std::string& terminal_id) const {
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      if (ranked[i].terminal.terminal_id == terminal_id) return i;
    }
    throw ValidationError("terminal '" + terminal_id + "' is not part of decision '" +
                          request_id + "'");
  }
};

// Wires the store, models, rules and retry policy together and owns the
// table of open decisions. route/score are safe to call concurrently;
// outcome recording serializes per context.
class RoutingContext {
 public:
  RoutingContext(FeatureStore& store, const TrainedForest* forest, const DowntimeModel* downtime,
                 const RuleSet* rules, std::size_t max_retries = 2)
      : store_(store), forest_(forest), downtime_(downtime), rules_(rules),
        max_retries_(max_retries) {
    if (forest_ && forest_->store_schema_id != store_.schema_id()) {
      throw SchemaError("forest schema '" + forest_->store_schema_id +
                        "' does not match store schema '" + store_.schema_id() + "'");
    }
    if (downtime_ && downtime_->model.store_schema_id != store_.gateway_schema_id()) {
      throw SchemaError("downtime model schema does not match the store's gateway schema");
    }
  }

  FeatureStore& store() { return store_; }
  const FeatureStore& store() const { return store_; }
  const TrainedForest* forest() const { return forest_; }
  const DowntimeModel* downtime() const { return downtime_; }
  const RuleSet* rules() const { return rules_; }
  std::size_t max_retries() const { return max_retries_; }
  std::uint64_t scoring_calls() const { return scoring_calls_.load(); }

  // Pure scoring: feature vector + forest probability per terminal, sorted
  // by probability descending, ties by ascending terminal_id. No state
  // change anywhere.
  RouteDecision score_terminals(const PaymentRequest& request, std::span<const Terminal> terminals,
                                TimestampMs ts) {
    if (terminals.empty()) {
      throw NoEligibleTerminalsError("cannot score an empty terminal list");
    }
    if (forest_ == nullptr) throw ValidationError("no forest model loaded");
    ++scoring_calls_;
    RouteDecision d;
    d.request_id = request.payment_id;
    d.created_at = ts;
    d.ranked.reserve(terminals.size());
    for (const auto& t : terminals) {
      FeatureVector v = store_.feature_vector(request, t.terminal_id, ts);
      d.ranked.push_back({t, forest_probability(*forest_, v)});
    }
    std::sort(d.ranked.begin(), d.ranked.end(), [](const ScoredTerminal& a, const ScoredTerminal& b) {
      if (a.probability != b.probability) return a.probability > b.probability;
      return a.terminal.terminal_id < b.terminal.terminal_id;
    });
    d.max_attempts = std::min(d.ranked.size(), max_retries_ + 1);
    d.recorded.assign(d.ranked.size(), false);
    return d;
  }

  // Full pipeline: static filter then scoring. The decision is stored until
  // resolved by record_outcome.
  RouteDecision route(const PaymentRequest& request, std::span<const Terminal> terminals,
                      TimestampMs ts) {
    request.validate();
    static const RuleSet kNoRules;
    StaticFilterResult filtered =
        static_filter(request, terminals, rules_ ? *rules_ : kNoRules, downtime_, store_, ts);
    RouteDecision d = score_terminals(request, filtered.terminals, ts);
    d.degraded = filtered.degraded;
    {
      std::lock_guard lock(mu_);
      if (open_.count(request.payment_id)) {
        throw ValidationError("payment_id '" + request.payment_id + "' already has an open decision");
      }
      open_.emplace(request.payment_id, d);
      requests_.emplace(request.payment_id, request);
    }
    return d;
  }

  bool has_open(const std::string& request_id) const {
    std::lock_guard lock(mu_);
    return open_.count(request_id) != 0;
  }

  std::optional<RouteDecision> find_decision(const std::string& request_id) const {
    std::lock_guard lock(mu_);
    auto it = open_.find(request_id);
    if (it == open_.end()) return std::nullopt;
    return it->second;
  }

  // Next terminal for a stored decision (retry path). Never re-scores.
  std::optional<ScoredTerminal> next_terminal(const std::string& request_id) {
    std::lock_guard lock(mu_);
    auto it = open_.find(request_id);
    if (it == open_.end()) throw UnknownEntityError("unknown payment: '" + request_id + "'");
    return it->second.next_terminal();
  }

  // Feed an outcome back. Success and customer failures resolve the
  // decision (customer failures are not retried and never reach the
  // store); a gateway failure keeps it open until retries are exhausted.
  void record_outcome(const std::string& request_id, const std::string& terminal_id,
                      const Outcome& outcome) {
    PaymentRequest request;
    {
      std::lock_guard lock(mu_);
      auto it = open_.find(request_id);
      if (it == open_.end()) throw UnknownEntityError("unknown payment: '" + request_id + "'");
      RouteDecision& d = it->second;
      std::size_t idx = d.index_of(terminal_id);
      if (d.recorded[idx]) {
        throw ValidationError("outcome for terminal '" + terminal_id +
                              "' already recorded on payment '" + request_id + "'");
      }
      d.recorded[idx] = true;
      // keep the cursor past externally-driven attempts (service callers
      // walk the ranked list themselves)
      d.attempt_cursor = std::max(d.attempt_cursor, idx + 1);
      request = requests_.at(request_id);

      bool resolved = outcome.status == OutcomeStatus::success ||
                      outcome.status == OutcomeStatus::customer_failure ||
                      d.attempt_cursor >= d.max_attempts;
      if (resolved) {
        open_.erase(it);
        requests_.erase(request_id);
      }
    }
    store_.apply_feedback(request, terminal_id, outcome);
  }

  std::size_t open_count() const {
    std::lock_guard lock(mu_);
    return open_.size();
  }

  // Drop decisions created before `older_than` that never resolved.
  std::size_t sweep_stale(TimestampMs older_than) {
    std::lock_guard lock(mu_);
    std::size_t dropped = 0;
    for (auto it = open_.begin(); it != open_.end();) {
      if (it->second.created_at < older_than) {
        requests_.erase(it->first);
        it = open_.erase(it);
        ++dropped;
      } else {
        ++it;
      }
    }
    return dropped;
  }

 private:
  FeatureStore& store_;
  const TrainedForest* forest_;
  const DowntimeModel* downtime_;
  const RuleSet* rules_;
  std::size_t max_retries_;
  std::unordered_map<std::string, RouteDecision> open_;
  std::unordered_map<std::string, PaymentRequest> requests_;
  mutable std::mutex mu_;
  std::atomic<std::uint64_t> scoring_calls_{0};
};

}  // namespace smartroute
