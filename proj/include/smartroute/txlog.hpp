#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "smartroute/core.hpp"
#include "smartroute/errors.hpp"

namespace smartroute {

// Attempt status in the transaction log. `failed_to_route` marks payments
// that never reached a terminal (no eligible candidates).
enum class TxStatus : std::uint8_t {
  success = 0,
  gateway_failure = 1,
  customer_failure = 2,
  failed_to_route = 3,
};

inline const char* tx_status_name(TxStatus s) {
  switch (s) {
    case TxStatus::success: return "success";
    case TxStatus::gateway_failure: return "gateway_failure";
    case TxStatus::customer_failure: return "customer_failure";
    case TxStatus::failed_to_route: return "failed_to_route";
  }
  throw ValidationError("invalid tx status value");
}

inline TxStatus parse_tx_status(const std::string& s) {
  if (s == "success") return TxStatus::success;
  if (s == "gateway_failure") return TxStatus::gateway_failure;
  if (s == "customer_failure") return TxStatus::customer_failure;
  if (s == "failed_to_route") return TxStatus::failed_to_route;
  throw ValidationError("unknown tx status: '" + s + "'");
}

inline TxStatus to_tx_status(OutcomeStatus s) { return static_cast<TxStatus>(s); }

inline OutcomeStatus to_outcome_status(TxStatus s) {
  if (s == TxStatus::failed_to_route) {
    throw ValidationError("failed_to_route record has no outcome");
  }
  return static_cast<OutcomeStatus>(s);
}

// One log line: a payment attempt and its outcome, flattened.
struct TxRecord {
  std::string payment_id;
  TimestampMs ts = 0;
  std::string merchant_id;
  Method method = Method::card;
  std::string issuer_bank;
  std::string network;
  std::int64_t amount = 0;
  std::string terminal_id;
  std::string gateway_id;
  TxStatus status = TxStatus::gateway_failure;

  PaymentRequest request() const {
    return PaymentRequest{payment_id, ts, merchant_id, method, issuer_bank, network, amount, {}};
  }

  Outcome outcome() const {
    return Outcome{payment_id, terminal_id, to_outcome_status(status), ts};
  }
};

inline nlohmann::json tx_record_to_json(const TxRecord& r) {
  return nlohmann::json{
      {"payment_id", r.payment_id},
      {"ts", ts_to_seconds(r.ts)},
      {"merchant_id", r.merchant_id},
      {"method", method_name(r.method)},
      {"issuer_bank", r.issuer_bank},
      {"network", r.network},
      {"amount", r.amount},
      {"terminal_id", r.terminal_id},
      {"gateway_id", r.gateway_id},
      {"status", tx_status_name(r.status)},
  };
}

inline TxRecord tx_record_from_json(const nlohmann::json& j) {
  TxRecord r;
  try {
    r.payment_id = j.at("payment_id").get<std::string>();
    r.ts = ts_from_seconds(j.at("ts").get<std::int64_t>());
    r.merchant_id = j.at("merchant_id").get<std::string>();
    r.method = parse_method(j.at("method").get<std::string>());
    r.issuer_bank = j.at("issuer_bank").get<std::string>();
    r.network = j.at("network").get<std::string>();
    r.amount = j.at("amount").get<std::int64_t>();
    r.terminal_id = j.at("terminal_id").get<std::string>();
    r.gateway_id = j.at("gateway_id").get<std::string>();
    r.status = parse_tx_status(j.at("status").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad transaction record: ") + e.what());
  }
  return r;
}

inline void write_txlog(std::ostream& out, const std::vector<TxRecord>& records) {
  for (const auto& r : records) out << tx_record_to_json(r).dump() << '\n';
}

inline void write_txlog_file(const std::string& path, const std::vector<TxRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  write_txlog(out, records);
  if (!out) throw IoError("write failed: " + path);
}

inline std::vector<TxRecord> read_txlog(std::istream& in) {
  std::vector<TxRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw IoError("transaction log line " + std::to_string(lineno) + " is not valid JSON");
    }
    records.push_back(tx_record_from_json(j));
  }
  return records;
}

inline std::vector<TxRecord> read_txlog_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open transaction log: " + path);
  return read_txlog(in);
}

}  // namespace smartroute
