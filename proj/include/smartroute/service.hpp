#pragma once

#include <istream>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "smartroute/core.hpp"
#include "smartroute/errors.hpp"
#include "smartroute/model_io.hpp"
#include "smartroute/router.hpp"

namespace smartroute {

// Newline-delimited JSON routing service. One request line, one response
// line, order preserved. Message schema is documented in docs/formats.md;
// every message carries "v": 1.
//
//   route    {v, type, request:{payment_id, ts, merchant_id, method,
//             issuer_bank, network, amount}}         -> route_result
//   feedback {v, type, payment_id, terminal_id, status, ts} -> ack
//   snapshot {v, type, [path]}                       -> snapshot_result
//
// Malformed input produces an error response and the connection stays open.
class Service {
 public:
  Service(RoutingContext& ctx, std::string default_snapshot_path = "store.snapshot")
      : ctx_(ctx), snapshot_path_(std::move(default_snapshot_path)) {}

  std::string handle_line(const std::string& line) {
    nlohmann::json response;
    try {
      response = dispatch(line);
    } catch (const Error& e) {
      response = error_response(e.what());
    } catch (const nlohmann::json::exception& e) {
      response = error_response(std::string("malformed message: ") + e.what());
    }
    return response.dump();
  }

  void run_stdio(std::istream& in, std::ostream& out) {
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      out << handle_line(line) << '\n';
      out.flush();
    }
  }

 private:
  nlohmann::json dispatch(const std::string& line) {
    std::lock_guard lock(mu_);
    nlohmann::json msg = nlohmann::json::parse(line, nullptr, false);
    if (msg.is_discarded()) throw ValidationError("message is not valid JSON");
    if (!msg.is_object()) throw ValidationError("message must be a JSON object");
    if (!msg.contains("v") || msg.at("v").get<int>() != 1) {
      throw ValidationError("message must carry version field v:1");
    }
    std::string type = msg.value("type", "");
    if (type == "route") return handle_route(msg);
    if (type == "feedback") return handle_feedback(msg);
    if (type == "snapshot") return handle_snapshot(msg);
    throw ValidationError("unknown message type: '" + type + "'");
  }

  nlohmann::json handle_route(const nlohmann::json& msg) {
    const auto& rj = msg.at("request");
    PaymentRequest req;
    req.payment_id = rj.at("payment_id").get<std::string>();
    req.timestamp = ts_from_seconds(rj.at("ts").get<std::int64_t>());
    req.merchant_id = rj.at("merchant_id").get<std::string>();
    req.method = parse_method(rj.at("method").get<std::string>());
    req.issuer_bank = rj.at("issuer_bank").get<std::string>();
    req.network = rj.at("network").get<std::string>();
    req.amount = rj.at("amount").get<std::int64_t>();
    req.validate();

    std::vector<Terminal> terminals = ctx_.store().registered_terminals();
    RouteDecision d = ctx_.route(req, terminals, req.timestamp);

    nlohmann::json ranked = nlohmann::json::array();
    for (const auto& st : d.ranked) {
      ranked.push_back(nlohmann::json::array({st.terminal.terminal_id, st.probability}));
    }
    return nlohmann::json{{"v", 1},
                          {"type", "route_result"},
                          {"request_id", d.request_id},
                          {"terminals", ranked},
                          {"degraded", d.degraded}};
  }

  nlohmann::json handle_feedback(const nlohmann::json& msg) {
    Outcome o;
    o.payment_id = msg.at("payment_id").get<std::string>();
    o.terminal_id = msg.at("terminal_id").get<std::string>();
    o.status = parse_outcome_status(msg.at("status").get<std::string>());
    o.timestamp = ts_from_seconds(msg.at("ts").get<std::int64_t>());
    ctx_.record_outcome(o.payment_id, o.terminal_id, o);
    return nlohmann::json{{"v", 1}, {"type", "ack"}, {"payment_id", o.payment_id}};
  }

  nlohmann::json handle_snapshot(const nlohmann::json& msg) {
    std::string path = msg.value("path", snapshot_path_);
    write_file_bytes(path, ctx_.store().snapshot());
    return nlohmann::json{{"v", 1}, {"type", "snapshot_result"}, {"path", path}};
  }

  nlohmann::json error_response(const std::string& reason) {
    return nlohmann::json{{"v", 1}, {"type", "error"}, {"reason", reason}};
  }

  RoutingContext& ctx_;
  std::string snapshot_path_;
  std::mutex mu_;
};

}  // namespace smartroute
