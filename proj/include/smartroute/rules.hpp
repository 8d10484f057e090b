#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "smartroute/core.hpp"
#include "smartroute/errors.hpp"

namespace smartroute {

// Per-merchant business constraints. An allow-list, when present, wins over
// everything except denies; allow and deny lists must be disjoint.
struct MerchantRule {
  std::optional<std::set<std::string>> allow_terminals;
  std::set<std::string> deny_terminals;
  std::set<std::string> deny_gateways;
  std::optional<std::set<Method>> methods;  // merchant accepts only these

  void validate(const std::string& merchant_id) const {
    if (allow_terminals) {
      for (const auto& t : *allow_terminals) {
        if (deny_terminals.count(t)) {
          throw ConfigError("merchant '" + merchant_id + "': terminal '" + t +
                            "' is both allowed and denied");
        }
      }
    }
  }
};

class RuleSet {
 public:
  RuleSet() = default;

  void set_rule(const std::string& merchant_id, MerchantRule rule) {
    rule.validate(merchant_id);
    merchants_[merchant_id] = std::move(rule);
  }

  const MerchantRule* find(const std::string& merchant_id) const {
    auto it = merchants_.find(merchant_id);
    return it == merchants_.end() ? nullptr : &it->second;
  }

  std::size_t size() const { return merchants_.size(); }

  // Rules file: one JSON object keyed by merchant_id. Unknown terminal or
  // gateway references are reported as warnings, not errors.
  static RuleSet from_json(const nlohmann::json& j, std::span<const Terminal> known,
                           std::vector<std::string>* warnings = nullptr) {
    if (!j.is_object()) throw ConfigError("rules file must be a JSON object keyed by merchant_id");
    std::set<std::string> known_terminals, known_gateways;
    for (const auto& t : known) {
      known_terminals.insert(t.terminal_id);
      known_gateways.insert(t.gateway_id);
    }
    auto warn_unknown = [&](const std::string& merchant, const std::string& kind,
                            const std::string& id, const std::set<std::string>& universe) {
      if (warnings && !universe.empty() && !universe.count(id)) {
        warnings->push_back("merchant '" + merchant + "': unknown " + kind + " '" + id + "'");
      }
    };

    RuleSet rules;
    for (const auto& [merchant, spec] : j.items()) {
      if (!spec.is_object()) throw ConfigError("rule for merchant '" + merchant + "' must be an object");
      MerchantRule rule;
      if (spec.contains("allow_terminals")) {
        rule.allow_terminals.emplace();
        for (const auto& t : spec.at("allow_terminals")) {
          rule.allow_terminals->insert(t.get<std::string>());
          warn_unknown(merchant, "terminal", t.get<std::string>(), known_terminals);
        }
      }
      if (spec.contains("deny_terminals")) {
        for (const auto& t : spec.at("deny_terminals")) {
          rule.deny_terminals.insert(t.get<std::string>());
          warn_unknown(merchant, "terminal", t.get<std::string>(), known_terminals);
        }
      }
      if (spec.contains("deny_gateways")) {
        for (const auto& g : spec.at("deny_gateways")) {
          rule.deny_gateways.insert(g.get<std::string>());
          warn_unknown(merchant, "gateway", g.get<std::string>(), known_gateways);
        }
      }
      if (spec.contains("methods")) {
        rule.methods.emplace();
        for (const auto& m : spec.at("methods")) rule.methods->insert(parse_method(m.get<std::string>()));
      }
      rules.set_rule(merchant, std::move(rule));
    }
    return rules;
  }

  static RuleSet load_file(const std::string& path, std::span<const Terminal> known,
                           std::vector<std::string>* warnings = nullptr) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open rules file: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("rules file is not valid JSON: " + path);
    return from_json(j, known, warnings);
  }

 private:
  std::map<std::string, MerchantRule> merchants_;
};

// Order-preserving filter: disabled terminals, unsupported methods, denied
// terminals/gateways, then allow-list intersection. An empty result is
// legal here; the caller decides how to fail.
inline std::vector<Terminal> apply_rules(const RuleSet& rules, const PaymentRequest& request,
                                         std::span<const Terminal> terminals) {
  const MerchantRule* rule = rules.find(request.merchant_id);
  std::vector<Terminal> out;
  if (rule && rule->methods && !rule->methods->count(request.method)) return out;
  for (const auto& t : terminals) {
    if (!t.enabled) continue;
    if (!t.supports(request.method)) continue;
    if (rule) {
      if (rule->deny_terminals.count(t.terminal_id)) continue;
      if (rule->deny_gateways.count(t.gateway_id)) continue;
      if (rule->allow_terminals && !rule->allow_terminals->count(t.terminal_id)) continue;
    }
    out.push_back(t);
  }
  return out;
}

}  // namespace smartroute
