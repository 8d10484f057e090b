#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "smartroute/bytes.hpp"
#include "smartroute/core.hpp"
#include "smartroute/decay.hpp"
#include "smartroute/errors.hpp"
#include "smartroute/event_window.hpp"
#include "smartroute/rng.hpp"

namespace smartroute {

// The characteristics a feature template may key on. The set is fixed:
// terminal identity, its gateway, and the payment attributes.
enum class Attribute : std::uint8_t {
  terminal_id = 0,
  gateway_id = 1,
  method = 2,
  issuer_bank = 3,
  network = 4,
  amount_bucket = 5,
  merchant_id = 6,
};

inline const char* attribute_name(Attribute a) {
  switch (a) {
    case Attribute::terminal_id: return "terminal_id";
    case Attribute::gateway_id: return "gateway_id";
    case Attribute::method: return "method";
    case Attribute::issuer_bank: return "issuer_bank";
    case Attribute::network: return "network";
    case Attribute::amount_bucket: return "amount_bucket";
    case Attribute::merchant_id: return "merchant_id";
  }
  throw ValidationError("invalid attribute value");
}

inline Attribute parse_attribute(const std::string& s) {
  if (s == "terminal_id") return Attribute::terminal_id;
  if (s == "gateway_id") return Attribute::gateway_id;
  if (s == "method") return Attribute::method;
  if (s == "issuer_bank") return Attribute::issuer_bank;
  if (s == "network") return Attribute::network;
  if (s == "amount_bucket") return Attribute::amount_bucket;
  if (s == "merchant_id") return Attribute::merchant_id;
  throw ConfigError("unknown feature attribute: '" + s + "'");
}

struct WindowSpec {
  enum class Kind : std::uint8_t { time = 0, event = 1 };

  Kind kind = Kind::time;
  double half_life_s = 0.0;  // kind == time
  std::size_t events = 0;    // kind == event

  static WindowSpec time(double half_life_s) {
    if (half_life_s <= 0.0) throw ConfigError("half-life must be positive");
    return WindowSpec{Kind::time, half_life_s, 0};
  }

  static WindowSpec event(std::size_t events) {
    if (events == 0) throw ConfigError("event window length must be >= 1");
    return WindowSpec{Kind::event, 0.0, events};
  }

  // "30s" / "10e"; fractional half-lives keep full precision.
  std::string suffix() const {
    char buf[40];
    if (kind == Kind::time) {
      if (half_life_s == static_cast<double>(static_cast<std::int64_t>(half_life_s))) {
        std::snprintf(buf, sizeof(buf), "%llds", static_cast<long long>(half_life_s));
      } else {
        std::snprintf(buf, sizeof(buf), "%.17gs", half_life_s);
      }
    } else {
      std::snprintf(buf, sizeof(buf), "%zue", events);
    }
    return buf;
  }
};

enum class FeatureLevel : std::uint8_t { terminal = 0, gateway = 1, system = 2 };

inline const char* feature_level_name(FeatureLevel l) {
  switch (l) {
    case FeatureLevel::terminal: return "terminal";
    case FeatureLevel::gateway: return "gateway";
    case FeatureLevel::system: return "system";
  }
  throw ValidationError("invalid feature level value");
}

inline FeatureLevel parse_feature_level(const std::string& s) {
  if (s == "terminal") return FeatureLevel::terminal;
  if (s == "gateway") return FeatureLevel::gateway;
  if (s == "system") return FeatureLevel::system;
  throw ConfigError("unknown feature level: '" + s + "'");
}

// One configured feature: an ordered attribute subset plus a window.
// System-level templates have an empty subset (the "overall" features).
struct FeatureTemplate {
  std::vector<Attribute> attributes;
  WindowSpec window;
  FeatureLevel level = FeatureLevel::terminal;

  void validate() const {
    if (level == FeatureLevel::system) {
      if (!attributes.empty()) {
        throw ConfigError("system-level template must have an empty attribute subset");
      }
    } else {
      if (attributes.empty()) {
        throw ConfigError("non-system template needs a non-empty attribute subset");
      }
      bool has_terminal = std::find(attributes.begin(), attributes.end(),
                                    Attribute::terminal_id) != attributes.end();
      bool has_gateway = std::find(attributes.begin(), attributes.end(),
                                   Attribute::gateway_id) != attributes.end();
      if (level == FeatureLevel::terminal && !has_terminal) {
        throw ConfigError("terminal-level template must include terminal_id");
      }
      if (level == FeatureLevel::gateway && (!has_gateway || has_terminal)) {
        throw ConfigError("gateway-level template must include gateway_id and not terminal_id");
      }
    }
    for (std::size_t i = 0; i < attributes.size(); ++i) {
      for (std::size_t j = i + 1; j < attributes.size(); ++j) {
        if (attributes[i] == attributes[j]) throw ConfigError("duplicate attribute in template");
      }
    }
    if (window.kind == WindowSpec::Kind::time && window.half_life_s <= 0.0) {
      throw ConfigError("half-life must be positive");
    }
    if (window.kind == WindowSpec::Kind::event && window.events == 0) {
      throw ConfigError("event window length must be >= 1");
    }
  }

  // "terminal_id_method_30s", "overall_10e", ...
  std::string name() const {
    std::string out;
    if (attributes.empty()) {
      out = "overall";
    } else {
      for (std::size_t i = 0; i < attributes.size(); ++i) {
        if (i) out += '_';
        out += attribute_name(attributes[i]);
      }
    }
    out += '_';
    out += window.suffix();
    return out;
  }

  // True when this template can be evaluated from a gateway id alone,
  // which is what the downtime model consumes.
  bool gateway_only() const {
    return level == FeatureLevel::gateway && attributes.size() == 1 &&
           attributes[0] == Attribute::gateway_id;
  }
};

// The default schema: every level gets the full set of time and event
// windows, plus two terminal/method combination features mirroring the
// multi-characteristic rows of the configuration matrix.
inline std::vector<FeatureTemplate> default_templates(
    const std::vector<double>& half_lives_s = {5.0, 30.0, 60.0, 300.0},
    const std::vector<std::size_t>& event_windows = {10, 30}) {
  std::vector<FeatureTemplate> out;
  auto add = [&out](FeatureLevel level, std::vector<Attribute> attrs, WindowSpec w) {
    FeatureTemplate t{std::move(attrs), w, level};
    t.validate();
    out.push_back(std::move(t));
  };
  for (double hl : half_lives_s)
    add(FeatureLevel::terminal, {Attribute::terminal_id}, WindowSpec::time(hl));
  for (std::size_t e : event_windows)
    add(FeatureLevel::terminal, {Attribute::terminal_id}, WindowSpec::event(e));
  add(FeatureLevel::terminal, {Attribute::terminal_id, Attribute::method}, WindowSpec::time(30.0));
  add(FeatureLevel::terminal, {Attribute::terminal_id, Attribute::method}, WindowSpec::event(10));
  for (double hl : half_lives_s)
    add(FeatureLevel::gateway, {Attribute::gateway_id}, WindowSpec::time(hl));
  for (std::size_t e : event_windows)
    add(FeatureLevel::gateway, {Attribute::gateway_id}, WindowSpec::event(e));
  for (double hl : half_lives_s) add(FeatureLevel::system, {}, WindowSpec::time(hl));
  for (std::size_t e : event_windows) add(FeatureLevel::system, {}, WindowSpec::event(e));
  return out;
}

// Canonical schema manifest. The schema id is a hash of this text, so any
// change to templates or smoothing produces a different id.
inline std::string schema_manifest(const std::vector<FeatureTemplate>& templates, double alpha) {
  std::string out = "schema-version 1\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "alpha %.17g\n", alpha);
  out += buf;
  for (const auto& t : templates) {
    out += "template ";
    out += feature_level_name(t.level);
    out += ' ';
    if (t.attributes.empty()) {
      out += '-';
    } else {
      for (std::size_t i = 0; i < t.attributes.size(); ++i) {
        if (i) out += ',';
        out += attribute_name(t.attributes[i]);
      }
    }
    if (t.window.kind == WindowSpec::Kind::time) {
      std::snprintf(buf, sizeof(buf), " time %.17g\n", t.window.half_life_s);
    } else {
      std::snprintf(buf, sizeof(buf), " event %zu\n", t.window.events);
    }
    out += buf;
  }
  return out;
}

inline std::string schema_id_of(const std::string& manifest) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(manifest)));
  return buf;
}

// Inverse of schema_manifest, used by snapshot restore.
inline std::pair<std::vector<FeatureTemplate>, double> parse_schema_manifest(
    const std::string& manifest) {
  std::istringstream in(manifest);
  std::string line;
  if (!std::getline(in, line) || line != "schema-version 1") {
    throw IoError("unsupported schema manifest version");
  }
  double alpha = 0.0;
  if (!std::getline(in, line) || std::sscanf(line.c_str(), "alpha %lg", &alpha) != 1) {
    throw IoError("schema manifest missing alpha");
  }
  std::vector<FeatureTemplate> templates;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag, level, attrs, kind;
    ls >> tag >> level >> attrs >> kind;
    if (tag != "template" || ls.fail()) throw IoError("bad manifest line: " + line);
    FeatureTemplate t;
    t.level = parse_feature_level(level);
    if (attrs != "-") {
      std::size_t start = 0;
      while (start <= attrs.size()) {
        std::size_t comma = attrs.find(',', start);
        std::string one = attrs.substr(start, comma == std::string::npos ? std::string::npos
                                                                         : comma - start);
        t.attributes.push_back(parse_attribute(one));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    }
    if (kind == "time") {
      double hl = 0.0;
      ls >> hl;
      if (ls.fail()) throw IoError("bad manifest line: " + line);
      t.window = WindowSpec::time(hl);
    } else if (kind == "event") {
      std::size_t e = 0;
      ls >> e;
      if (ls.fail()) throw IoError("bad manifest line: " + line);
      t.window = WindowSpec::event(e);
    } else {
      throw IoError("bad manifest line: " + line);
    }
    t.validate();
    templates.push_back(std::move(t));
  }
  if (templates.empty()) throw IoError("schema manifest has no templates");
  return {templates, alpha};
}

// Feature values for one (request, terminal) pair, in schema order.
struct FeatureVector {
  std::vector<double> values;
  std::string schema_id;
};

// All time-window, event and overall features at terminal, gateway and
// system level, updated in real time through the feedback loop.
//
// Thread safety: reads (feature vectors, snapshot) take a shared lock and
// observe a consistent point-in-time state; feedback and registration take
// an exclusive lock.
class FeatureStore {
 public:
  explicit FeatureStore(std::vector<FeatureTemplate> templates = default_templates(),
                        double alpha = 1.0)
      : templates_(std::move(templates)), alpha_(alpha) {
    if (templates_.empty()) throw ConfigError("feature schema needs at least one template");
    if (alpha_ < 0.0) throw ConfigError("smoothing alpha must be non-negative");
    for (const auto& t : templates_) t.validate();
    manifest_ = schema_manifest(templates_, alpha_);
    schema_id_ = schema_id_of(manifest_);
    for (std::size_t i = 0; i < templates_.size(); ++i) {
      if (templates_[i].gateway_only()) gateway_schema_.push_back(i);
    }
    std::string gw = "gateway-subset of " + schema_id_ + "\n";
    for (std::size_t i : gateway_schema_) gw += templates_[i].name() + "\n";
    gateway_schema_id_ = schema_id_of(gw);
  }

  FeatureStore(const FeatureStore& other) { copy_from(other); }
  FeatureStore& operator=(const FeatureStore& other) {
    if (this != &other) copy_from(other);
    return *this;
  }

  const std::vector<FeatureTemplate>& templates() const { return templates_; }
  double alpha() const { return alpha_; }
  const std::string& schema_id() const { return schema_id_; }
  const std::string& manifest() const { return manifest_; }
  const std::string& gateway_schema_id() const { return gateway_schema_id_; }

  std::vector<std::string> feature_names() const {
    std::vector<std::string> names;
    names.reserve(templates_.size());
    for (const auto& t : templates_) names.push_back(t.name());
    return names;
  }

  std::vector<std::string> gateway_feature_names() const {
    std::vector<std::string> names;
    for (std::size_t i : gateway_schema_) names.push_back(templates_[i].name());
    return names;
  }

  void register_terminal(const Terminal& t) {
    t.validate();
    std::unique_lock lock(mu_);
    auto it = terminals_.find(t.terminal_id);
    if (it != terminals_.end() && it->second.gateway_id != t.gateway_id) {
      throw ValidationError("terminal '" + t.terminal_id + "' already maps to gateway '" +
                            it->second.gateway_id + "'");
    }
    terminals_[t.terminal_id] = t;
  }

  Terminal terminal(const std::string& terminal_id) const {
    std::shared_lock lock(mu_);
    return terminal_locked(terminal_id);
  }

  bool has_terminal(const std::string& terminal_id) const {
    std::shared_lock lock(mu_);
    return terminals_.count(terminal_id) != 0;
  }

  bool has_gateway(const std::string& gateway_id) const {
    std::shared_lock lock(mu_);
    for (const auto& [id, t] : terminals_) {
      if (t.gateway_id == gateway_id) return true;
    }
    return false;
  }

  std::vector<Terminal> registered_terminals() const {
    std::shared_lock lock(mu_);
    std::vector<Terminal> out;
    out.reserve(terminals_.size());
    for (const auto& [id, t] : terminals_) out.push_back(t);
    return out;
  }

  // Read-only: one value per template, bound from (request, terminal).
  // Keys never written read as 1.0 (the optimistic initial value).
  FeatureVector feature_vector(const PaymentRequest& request, const std::string& terminal_id,
                               TimestampMs ts) const {
    std::shared_lock lock(mu_);
    const Terminal& term = terminal_locked(terminal_id);
    FeatureVector v;
    v.schema_id = schema_id_;
    v.values.reserve(templates_.size());
    for (std::size_t i = 0; i < templates_.size(); ++i) {
      v.values.push_back(read_key(bind_key(i, request, term), i, ts));
    }
    return v;
  }

  // Gateway-scoped sub-vector consumed by the downtime model.
  FeatureVector gateway_feature_vector(const std::string& gateway_id, TimestampMs ts) const {
    std::shared_lock lock(mu_);
    bool known = false;
    for (const auto& [id, t] : terminals_) {
      if (t.gateway_id == gateway_id) {
        known = true;
        break;
      }
    }
    if (!known) throw UnknownEntityError("unknown gateway: '" + gateway_id + "'");
    FeatureVector v;
    v.schema_id = gateway_schema_id_;
    v.values.reserve(gateway_schema_.size());
    for (std::size_t i : gateway_schema_) {
      std::string key = key_prefix(i) + gateway_id;
      v.values.push_back(read_key(key, i, ts));
    }
    return v;
  }

  // Feedback loop: update every matching key with the outcome. Customer
  // failures never touch the store; terminal and gateway performance does
  // not account for them.
  void apply_feedback(const PaymentRequest& request, const std::string& terminal_id,
                      const Outcome& outcome) {
    if (outcome.payment_id != request.payment_id) {
      throw ValidationError("outcome does not belong to this request");
    }
    if (outcome.terminal_id != terminal_id) {
      throw ValidationError("outcome does not belong to this terminal");
    }
    if (outcome.status == OutcomeStatus::customer_failure) return;
    int bit = outcome.status == OutcomeStatus::success ? 1 : 0;
    std::unique_lock lock(mu_);
    const Terminal& term = terminal_locked(terminal_id);
    for (std::size_t i = 0; i < templates_.size(); ++i) {
      std::string key = bind_key(i, request, term);
      if (templates_[i].window.kind == WindowSpec::Kind::time) {
        auto [it, inserted] = counters_.try_emplace(key);
        if (inserted) it->second.half_life_s = templates_[i].window.half_life_s;
        it->second.update(bit, outcome.timestamp);
      } else {
        auto [it, inserted] = windows_.try_emplace(key, templates_[i].window.events);
        it->second.update(bit);
      }
    }
  }

  std::size_t key_count() const {
    std::shared_lock lock(mu_);
    return counters_.size() + windows_.size();
  }

  // Point-in-time binary snapshot; see docs/formats.md for the exact layout.
  std::vector<std::uint8_t> snapshot() const {
    std::shared_lock lock(mu_);
    ByteWriter w;
    w.raw("RFSTORE1", 8);
    w.u32(1);
    w.str(schema_id_);
    w.str(manifest_);

    std::vector<std::string> term_ids;
    term_ids.reserve(terminals_.size());
    for (const auto& [id, t] : terminals_) term_ids.push_back(id);
    std::sort(term_ids.begin(), term_ids.end());
    w.u32(static_cast<std::uint32_t>(term_ids.size()));
    for (const auto& id : term_ids) {
      const Terminal& t = terminals_.at(id);
      w.str(t.terminal_id);
      w.str(t.gateway_id);
      std::uint32_t mask = 0;
      for (Method m : t.supported_methods) mask |= 1u << static_cast<unsigned>(m);
      w.u32(mask);
      w.u8(t.enabled ? 1 : 0);
    }

    std::vector<std::string> keys;
    keys.reserve(counters_.size());
    for (const auto& [k, c] : counters_) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    w.u64(keys.size());
    for (const auto& k : keys) {
      const DecayedCounter& c = counters_.at(k);
      w.str(k);
      w.f64(c.successes);
      w.f64(c.total);
      w.i64(c.last_update);
    }

    keys.clear();
    for (const auto& [k, win] : windows_) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    w.u64(keys.size());
    for (const auto& k : keys) {
      const EventWindow& win = windows_.at(k);
      w.str(k);
      w.u64(win.count());
      w.u32(static_cast<std::uint32_t>(win.buffer().size()));
      if (!win.buffer().empty()) w.raw(win.buffer().data(), win.buffer().size());
    }
    return w.take();
  }

  static FeatureStore restore(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    char magic[8];
    r.raw(magic, 8);
    if (std::string(magic, 8) != "RFSTORE1") throw IoError("bad snapshot magic");
    if (r.u32() != 1) throw IoError("unsupported snapshot version");
    std::string schema_id = r.str();
    std::string manifest = r.str();
    if (schema_id_of(manifest) != schema_id) {
      throw SchemaError("snapshot schema_id does not match its manifest");
    }
    auto [templates, alpha] = parse_schema_manifest(manifest);
    FeatureStore store(std::move(templates), alpha);
    if (store.schema_id_ != schema_id) {
      throw SchemaError("snapshot schema_id mismatch after manifest parse");
    }

    std::uint32_t n_terminals = r.u32();
    for (std::uint32_t i = 0; i < n_terminals; ++i) {
      Terminal t;
      t.terminal_id = r.str();
      t.gateway_id = r.str();
      std::uint32_t mask = r.u32();
      for (unsigned b = 0; b < 4; ++b) {
        if (mask & (1u << b)) t.supported_methods.insert(static_cast<Method>(b));
      }
      t.enabled = r.u8() != 0;
      store.terminals_[t.terminal_id] = t;
    }

    std::uint64_t n_counters = r.u64();
    for (std::uint64_t i = 0; i < n_counters; ++i) {
      std::string key = r.str();
      DecayedCounter c;
      c.successes = r.f64();
      c.total = r.f64();
      c.last_update = r.i64();
      c.half_life_s = store.half_life_of_key(key);
      store.counters_.emplace(std::move(key), c);
    }

    std::uint64_t n_windows = r.u64();
    for (std::uint64_t i = 0; i < n_windows; ++i) {
      std::string key = r.str();
      std::uint64_t count = r.u64();
      std::uint32_t buflen = r.u32();
      std::vector<std::uint8_t> buf(buflen);
      if (buflen) r.raw(buf.data(), buflen);
      EventWindow win(store.window_length_of_key(key));
      win.restore_state(std::move(buf), count);
      store.windows_.emplace(std::move(key), std::move(win));
    }
    if (!r.done()) throw IoError("trailing bytes after snapshot payload");
    return store;
  }

 private:
  void copy_from(const FeatureStore& other) {
    std::shared_lock lock(other.mu_);
    templates_ = other.templates_;
    alpha_ = other.alpha_;
    manifest_ = other.manifest_;
    schema_id_ = other.schema_id_;
    gateway_schema_ = other.gateway_schema_;
    gateway_schema_id_ = other.gateway_schema_id_;
    terminals_ = other.terminals_;
    counters_ = other.counters_;
    windows_ = other.windows_;
  }

  const Terminal& terminal_locked(const std::string& terminal_id) const {
    auto it = terminals_.find(terminal_id);
    if (it == terminals_.end()) {
      throw UnknownEntityError("unknown terminal: '" + terminal_id + "'");
    }
    return it->second;
  }

  static std::string key_prefix(std::size_t template_idx) {
    return std::to_string(template_idx) + '\x1e';
  }

  // Key = template index + bound attribute values, '\x1f'-separated.
  std::string bind_key(std::size_t template_idx, const PaymentRequest& req,
                       const Terminal& term) const {
    std::string key = key_prefix(template_idx);
    const auto& attrs = templates_[template_idx].attributes;
    for (std::size_t i = 0; i < attrs.size(); ++i) {
      if (i) key += '\x1f';
      switch (attrs[i]) {
        case Attribute::terminal_id: key += term.terminal_id; break;
        case Attribute::gateway_id: key += term.gateway_id; break;
        case Attribute::method: key += method_name(req.method); break;
        case Attribute::issuer_bank: key += req.issuer_bank; break;
        case Attribute::network: key += req.network; break;
        case Attribute::amount_bucket: key += std::to_string(amount_bucket(req.amount)); break;
        case Attribute::merchant_id: key += req.merchant_id; break;
      }
    }
    return key;
  }

  double read_key(const std::string& key, std::size_t template_idx, TimestampMs ts) const {
    if (templates_[template_idx].window.kind == WindowSpec::Kind::time) {
      auto it = counters_.find(key);
      if (it == counters_.end()) return 1.0;
      return it->second.read(ts, alpha_);
    }
    auto it = windows_.find(key);
    if (it == windows_.end()) return 1.0;
    return it->second.read();
  }

  std::size_t template_of_key(const std::string& key) const {
    std::size_t sep = key.find('\x1e');
    if (sep == std::string::npos) throw IoError("malformed feature key");
    std::size_t idx = 0;
    try {
      idx = static_cast<std::size_t>(std::stoull(key.substr(0, sep)));
    } catch (const std::exception&) {
      throw IoError("malformed feature key");
    }
    if (idx >= templates_.size()) throw IoError("feature key references unknown template");
    return idx;
  }

  double half_life_of_key(const std::string& key) const {
    const FeatureTemplate& t = templates_[template_of_key(key)];
    if (t.window.kind != WindowSpec::Kind::time) throw IoError("counter key bound to event template");
    return t.window.half_life_s;
  }

  std::size_t window_length_of_key(const std::string& key) const {
    const FeatureTemplate& t = templates_[template_of_key(key)];
    if (t.window.kind != WindowSpec::Kind::event) throw IoError("window key bound to time template");
    return t.window.events;
  }

  std::vector<FeatureTemplate> templates_;
  double alpha_ = 1.0;
  std::string manifest_;
  std::string schema_id_;
  std::vector<std::size_t> gateway_schema_;
  std::string gateway_schema_id_;
  std::map<std::string, Terminal> terminals_;
  std::unordered_map<std::string, DecayedCounter> counters_;
  std::unordered_map<std::string, EventWindow> windows_;
  mutable std::shared_mutex mu_;
};

}  // namespace smartroute
