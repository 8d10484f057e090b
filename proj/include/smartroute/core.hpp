#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "smartroute/errors.hpp"

namespace smartroute {

// Timestamps are stored as integer milliseconds since epoch. External
// surfaces (transaction logs, service messages) exchange whole seconds;
// decay formulas see fractional seconds.
using TimestampMs = std::int64_t;

constexpr TimestampMs ts_from_seconds(std::int64_t s) { return s * 1000; }

inline std::int64_t ts_to_seconds(TimestampMs ms) {
  if (ms % 1000 != 0) {
    throw ValidationError("timestamp is not a whole second: " + std::to_string(ms) + "ms");
  }
  return ms / 1000;
}

inline double seconds_between(TimestampMs from, TimestampMs to) {
  return static_cast<double>(to - from) / 1000.0;
}

enum class Method : std::uint8_t { card = 0, upi = 1, netbanking = 2, wallet = 3 };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::card: return "card";
    case Method::upi: return "upi";
    case Method::netbanking: return "netbanking";
    case Method::wallet: return "wallet";
  }
  throw ValidationError("invalid method value");
}

inline Method parse_method(const std::string& s) {
  if (s == "card") return Method::card;
  if (s == "upi") return Method::upi;
  if (s == "netbanking") return Method::netbanking;
  if (s == "wallet") return Method::wallet;
  throw ValidationError("unknown payment method: '" + s + "'");
}

// One inbound transaction. Immutable value; attributes feed feature keys.
struct PaymentRequest {
  std::string payment_id;
  TimestampMs timestamp = 0;
  std::string merchant_id;
  Method method = Method::card;
  std::string issuer_bank;
  std::string network;
  std::int64_t amount = 0;  // minor currency units
  std::map<std::string, std::string> extra_attributes;

  void validate() const {
    if (payment_id.empty()) throw ValidationError("payment_id must be non-empty");
    if (timestamp <= 0) throw ValidationError("timestamp must be positive");
    if (amount <= 0) throw ValidationError("amount must be positive");
  }
};

// Routable endpoint; every terminal belongs to exactly one gateway.
struct Terminal {
  std::string terminal_id;
  std::string gateway_id;
  std::set<Method> supported_methods;
  bool enabled = true;

  bool supports(Method m) const { return supported_methods.count(m) != 0; }

  void validate() const {
    if (terminal_id.empty()) throw ValidationError("terminal_id must be non-empty");
    if (gateway_id.empty()) throw ValidationError("gateway_id must be non-empty");
  }
};

enum class OutcomeStatus : std::uint8_t { success = 0, gateway_failure = 1, customer_failure = 2 };

inline const char* outcome_status_name(OutcomeStatus s) {
  switch (s) {
    case OutcomeStatus::success: return "success";
    case OutcomeStatus::gateway_failure: return "gateway_failure";
    case OutcomeStatus::customer_failure: return "customer_failure";
  }
  throw ValidationError("invalid outcome status value");
}

inline OutcomeStatus parse_outcome_status(const std::string& s) {
  if (s == "success") return OutcomeStatus::success;
  if (s == "gateway_failure") return OutcomeStatus::gateway_failure;
  if (s == "customer_failure") return OutcomeStatus::customer_failure;
  throw ValidationError("unknown outcome status: '" + s + "'");
}

struct Outcome {
  std::string payment_id;
  std::string terminal_id;
  OutcomeStatus status = OutcomeStatus::gateway_failure;
  TimestampMs timestamp = 0;
};

struct MetricsCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;
};

// Plain success ratio over a fixed scope. Callers with zero observations
// must use the decayed-counter prior path instead of this.
inline double success_rate(std::uint64_t successes, std::uint64_t total) {
  if (total == 0) throw UndefinedMetricError("success rate undefined for zero transactions");
  if (successes > total) throw ValidationError("successes exceed total");
  return static_cast<double>(successes) / static_cast<double>(total);
}

// Base-10 logarithmic amount bucket, capped at 6 buckets (0..5).
inline int amount_bucket(std::int64_t amount) {
  if (amount <= 0) throw ValidationError("amount must be positive");
  int bucket = 0;
  while (amount >= 10 && bucket < 5) {
    amount /= 10;
    ++bucket;
  }
  return bucket;
}

inline bool is_customer_failure(const Outcome& o) {
  return o.status == OutcomeStatus::customer_failure;
}

}  // namespace smartroute
