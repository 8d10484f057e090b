#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "smartroute/core.hpp"
#include "smartroute/errors.hpp"
#include "smartroute/rng.hpp"
#include "smartroute/router.hpp"
#include "smartroute/training_data.hpp"
#include "smartroute/txlog.hpp"

namespace smartroute {

struct DriftSpec {
  double amplitude = 0.0;  // multiplicative, in [0, 1]
  double period_s = 3600.0;
};

struct DowntimeWindow {
  TimestampMs start_ts = 0;
  TimestampMs end_ts = 0;
  double success_prob = 0.0;  // overrides the base probability inside the window

  bool covers(TimestampMs ts) const { return ts >= start_ts && ts < end_ts; }
};

// Ground-truth behavior of one terminal: base success probability with
// optional per-(method, issuer_bank) overrides, a customer-failure rate,
// scheduled outage windows and optional sinusoidal drift.
struct TerminalProfile {
  std::string terminal_id;
  double base_success_prob = 0.9;
  std::map<std::string, double> pair_success_prob;  // key "method|issuer_bank"
  double customer_failure_rate = 0.0;
  std::vector<DowntimeWindow> downtime_windows;
  std::optional<DriftSpec> drift;

  static std::string pair_key(Method m, const std::string& bank) {
    return std::string(method_name(m)) + '|' + bank;
  }

  void validate() const {
    auto check_prob = [](double p, const char* what) {
      if (p < 0.0 || p > 1.0) throw ConfigError(std::string(what) + " must be in [0, 1]");
    };
    check_prob(base_success_prob, "base_success_prob");
    check_prob(customer_failure_rate, "customer_failure_rate");
    for (const auto& [k, p] : pair_success_prob) check_prob(p, "pair_success_prob");
    for (const auto& w : downtime_windows) {
      check_prob(w.success_prob, "outage success_prob");
      if (w.end_ts <= w.start_ts) throw ConfigError("downtime window must have start < end");
    }
    for (std::size_t i = 0; i < downtime_windows.size(); ++i) {
      for (std::size_t j = i + 1; j < downtime_windows.size(); ++j) {
        const auto& a = downtime_windows[i];
        const auto& b = downtime_windows[j];
        if (a.start_ts < b.end_ts && b.start_ts < a.end_ts) {
          throw ConfigError("downtime windows overlap on terminal '" + terminal_id + "'");
        }
      }
    }
    if (drift) {
      if (drift->amplitude < 0.0 || drift->amplitude > 1.0) {
        throw ConfigError("drift amplitude must be in [0, 1]");
      }
      if (drift->period_s <= 0.0) throw ConfigError("drift period must be positive");
    }
  }

  double effective_success_prob(Method method, const std::string& issuer_bank,
                                TimestampMs ts) const {
    for (const auto& w : downtime_windows) {
      if (w.covers(ts)) return w.success_prob;
    }
    double p = base_success_prob;
    auto it = pair_success_prob.find(pair_key(method, issuer_bank));
    if (it != pair_success_prob.end()) p = it->second;
    if (drift) {
      double t = static_cast<double>(ts) / 1000.0;
      p *= 1.0 + drift->amplitude * std::sin(2.0 * M_PI * t / drift->period_s);
    }
    return std::clamp(p, 0.0, 1.0);
  }
};

// Weighted categorical distribution; weights must sum to 1.
struct CategoricalDist {
  std::vector<std::pair<std::string, double>> items;  // sorted by key

  void validate(const char* what) const {
    if (items.empty()) throw ConfigError(std::string(what) + " distribution is empty");
    double sum = 0.0;
    for (const auto& [k, w] : items) {
      if (w <= 0.0) throw ConfigError(std::string(what) + " weights must be positive");
      sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-6) {
      throw ConfigError(std::string(what) + " weights must sum to 1");
    }
  }

  const std::string& sample(Rng& rng) const {
    double u = rng.unit();
    double acc = 0.0;
    for (const auto& [k, w] : items) {
      acc += w;
      if (u < acc) return k;
    }
    return items.back().first;
  }
};

struct GatewayOutageCfg {
  std::string gateway_id;
  double start_s = 0.0;  // relative to scenario start
  double end_s = 0.0;
  double success_prob = 0.0;
};

struct ScenarioConfig {
  std::vector<Terminal> terminals;
  std::map<std::string, TerminalProfile> profiles;  // by terminal_id
  CategoricalDist merchants, methods, issuer_banks, networks;
  std::vector<std::pair<std::int64_t, double>> amounts;  // sorted by amount
  double arrival_rate_per_s = 5.0;
  std::size_t payments = 10000;
  TimestampMs start_ts = ts_from_seconds(1700000000);
  std::uint64_t seed = 1;
  std::vector<GatewayOutageCfg> gateway_outages;

  // Payments arrive on a whole-second grid so logs replay bit-exactly.
  TimestampMs arrival_ts(std::size_t index) const {
    auto offset_s = static_cast<std::int64_t>(
        std::floor(static_cast<double>(index) / arrival_rate_per_s));
    return start_ts + ts_from_seconds(offset_s);
  }

  std::vector<OutageLabel> outage_labels() const {
    std::vector<OutageLabel> out;
    for (const auto& o : gateway_outages) {
      out.push_back({o.gateway_id, start_ts + static_cast<TimestampMs>(o.start_s * 1000.0),
                     start_ts + static_cast<TimestampMs>(o.end_s * 1000.0)});
    }
    return out;
  }

  const TerminalProfile& profile(const std::string& terminal_id) const {
    auto it = profiles.find(terminal_id);
    if (it == profiles.end()) {
      throw ConfigError("no profile for terminal '" + terminal_id + "'");
    }
    return it->second;
  }

  void validate() const {
    if (terminals.empty()) throw ConfigError("scenario needs at least one terminal");
    if (arrival_rate_per_s <= 0.0) throw ConfigError("arrival rate must be positive");
    if (start_ts <= 0) throw ConfigError("start_ts must be positive");
    for (const auto& t : terminals) {
      t.validate();
      profile(t.terminal_id).validate();
    }
    merchants.validate("merchants");
    methods.validate("methods");
    issuer_banks.validate("issuer_banks");
    networks.validate("networks");
    for (const auto& [k, m] : methods.items) parse_method(k);
    if (amounts.empty()) throw ConfigError("amounts distribution is empty");
    double sum = 0.0;
    for (const auto& [amount, w] : amounts) {
      if (amount <= 0) throw ConfigError("amounts must be positive");
      if (w <= 0.0) throw ConfigError("amount weights must be positive");
      sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-6) throw ConfigError("amount weights must sum to 1");
    for (const auto& o : gateway_outages) {
      bool known = false;
      for (const auto& t : terminals) known = known || t.gateway_id == o.gateway_id;
      if (!known) throw ConfigError("outage references unknown gateway '" + o.gateway_id + "'");
      if (o.end_s <= o.start_s) throw ConfigError("outage must have start < end");
      if (o.success_prob < 0.0 || o.success_prob > 1.0) {
        throw ConfigError("outage success_prob must be in [0, 1]");
      }
    }
  }

  static ScenarioConfig from_json(const nlohmann::json& j);
  static ScenarioConfig load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario config: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("scenario config is not valid JSON: " + path);
    return from_json(j);
  }
};

inline ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
  ScenarioConfig cfg;
  try {
    auto dist = [](const nlohmann::json& d) {
      CategoricalDist out;
      for (const auto& [k, v] : d.items()) out.items.emplace_back(k, v.get<double>());
      return out;  // nlohmann objects iterate in key order
    };
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.payments = j.value("payments", std::size_t{10000});
    cfg.arrival_rate_per_s = j.value("arrival_rate_per_s", 5.0);
    cfg.start_ts = ts_from_seconds(j.value("start_ts", std::int64_t{1700000000}));
    cfg.merchants = dist(j.at("merchants"));
    cfg.methods = dist(j.at("methods"));
    cfg.issuer_banks = dist(j.at("issuer_banks"));
    cfg.networks = dist(j.at("networks"));
    for (const auto& [k, v] : j.at("amounts").items()) {
      cfg.amounts.emplace_back(std::stoll(k), v.get<double>());
    }
    std::sort(cfg.amounts.begin(), cfg.amounts.end());
    for (const auto& tj : j.at("terminals")) {
      Terminal t;
      t.terminal_id = tj.at("terminal_id").get<std::string>();
      t.gateway_id = tj.at("gateway_id").get<std::string>();
      for (const auto& m : tj.at("supported_methods")) {
        t.supported_methods.insert(parse_method(m.get<std::string>()));
      }
      t.enabled = tj.value("enabled", true);
      cfg.terminals.push_back(t);

      TerminalProfile p;
      p.terminal_id = t.terminal_id;
      p.base_success_prob = tj.value("base_success_prob", 0.9);
      if (tj.contains("pair_success_prob")) {
        for (const auto& [k, v] : tj.at("pair_success_prob").items()) {
          p.pair_success_prob[k] = v.get<double>();
        }
      }
      p.customer_failure_rate = tj.value("customer_failure_rate", 0.0);
      if (tj.contains("drift")) {
        DriftSpec d;
        d.amplitude = tj.at("drift").value("amplitude", 0.0);
        d.period_s = tj.at("drift").value("period_s", 3600.0);
        p.drift = d;
      }
      if (tj.contains("downtime_windows")) {
        for (const auto& wj : tj.at("downtime_windows")) {
          DowntimeWindow w;
          w.start_ts = cfg.start_ts + static_cast<TimestampMs>(wj.at("start_s").get<double>() * 1000.0);
          w.end_ts = cfg.start_ts + static_cast<TimestampMs>(wj.at("end_s").get<double>() * 1000.0);
          w.success_prob = wj.value("success_prob", 0.0);
          p.downtime_windows.push_back(w);
        }
      }
      cfg.profiles[t.terminal_id] = std::move(p);
    }
    if (j.contains("gateway_outages")) {
      for (const auto& oj : j.at("gateway_outages")) {
        GatewayOutageCfg o;
        o.gateway_id = oj.at("gateway_id").get<std::string>();
        o.start_s = oj.at("start_s").get<double>();
        o.end_s = oj.at("end_s").get<double>();
        o.success_prob = oj.value("success_prob", 0.0);
        cfg.gateway_outages.push_back(o);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad scenario config: ") + e.what());
  }
  // A gateway outage is the same window on every terminal of the gateway.
  for (const auto& o : cfg.gateway_outages) {
    for (const auto& t : cfg.terminals) {
      if (t.gateway_id != o.gateway_id) continue;
      DowntimeWindow w;
      w.start_ts = cfg.start_ts + static_cast<TimestampMs>(o.start_s * 1000.0);
      w.end_ts = cfg.start_ts + static_cast<TimestampMs>(o.end_s * 1000.0);
      w.success_prob = o.success_prob;
      cfg.profiles[t.terminal_id].downtime_windows.push_back(w);
    }
  }
  cfg.validate();
  return cfg;
}

inline PaymentRequest generate_payment(const ScenarioConfig& cfg, Rng& rng, TimestampMs ts,
                                       std::size_t index) {
  PaymentRequest req;
  char buf[24];
  std::snprintf(buf, sizeof(buf), "p%08zu", index);
  req.payment_id = buf;
  req.timestamp = ts;
  req.merchant_id = cfg.merchants.sample(rng);
  req.method = parse_method(cfg.methods.sample(rng));
  req.issuer_bank = cfg.issuer_banks.sample(rng);
  req.network = cfg.networks.sample(rng);
  double u = rng.unit();
  double acc = 0.0;
  req.amount = cfg.amounts.back().first;
  for (const auto& [amount, w] : cfg.amounts) {
    acc += w;
    if (u < acc) {
      req.amount = amount;
      break;
    }
  }
  return req;
}

// Customer failure is drawn first; it masks whatever the terminal would
// have done, mirroring the failure taxonomy (customer vs gateway).
inline Outcome simulate_attempt(const TerminalProfile& profile, const PaymentRequest& request,
                                TimestampMs ts, Rng& rng) {
  Outcome o;
  o.payment_id = request.payment_id;
  o.terminal_id = profile.terminal_id;
  o.timestamp = ts;
  if (rng.unit() < profile.customer_failure_rate) {
    o.status = OutcomeStatus::customer_failure;
    return o;
  }
  double p = profile.effective_success_prob(request.method, request.issuer_bank, ts);
  o.status = rng.unit() < p ? OutcomeStatus::success : OutcomeStatus::gateway_failure;
  return o;
}

enum class RouterMode { smart, random_pick };

struct ArmStats {
  std::string name;
  std::size_t payments = 0;
  std::size_t attempts = 0;  // total transactions routed through terminals
  std::size_t successes = 0;
  std::size_t retries = 0;
  std::size_t failed_to_route = 0;

  // Success rate over transactions: successes / total attempts.
  double sr() const {
    return attempts == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(attempts);
  }

  double payment_sr() const {
    return payments == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(payments);
  }
};

struct TimelineRow {
  std::size_t bucket = 0;
  std::string arm;
  double sr = 0.0;
};

struct ScenarioResult {
  std::vector<TxRecord> log;
  ArmStats stats;
  std::vector<TimelineRow> timeline;
};

namespace detail {

struct PaymentResult {
  bool success = false;
  std::size_t attempts = 0;
  bool routed = true;
};

inline TxRecord make_record(const PaymentRequest& req, const std::string& terminal_id,
                            const std::string& gateway_id, TxStatus status, TimestampMs ts) {
  TxRecord r;
  r.payment_id = req.payment_id;
  r.ts = ts;
  r.merchant_id = req.merchant_id;
  r.method = req.method;
  r.issuer_bank = req.issuer_bank;
  r.network = req.network;
  r.amount = req.amount;
  r.terminal_id = terminal_id;
  r.gateway_id = gateway_id;
  r.status = status;
  return r;
}

// One payment end to end through the smart pipeline: route once, then walk
// the decision with next_terminal; the scorer is never consulted again.
inline PaymentResult drive_smart(const ScenarioConfig& cfg, RoutingContext& ctx,
                                 const PaymentRequest& req, TimestampMs ts, Rng& rng,
                                 std::vector<TxRecord>& log) {
  PaymentResult result;
  try {
    ctx.route(req, cfg.terminals, ts);
  } catch (const NoEligibleTerminalsError&) {
    log.push_back(make_record(req, "", "", TxStatus::failed_to_route, ts));
    result.routed = false;
    return result;
  }
  while (ctx.has_open(req.payment_id)) {
    auto st = ctx.next_terminal(req.payment_id);
    if (!st) break;
    ++result.attempts;
    Outcome outcome = simulate_attempt(cfg.profile(st->terminal.terminal_id), req, ts, rng);
    log.push_back(make_record(req, st->terminal.terminal_id, st->terminal.gateway_id,
                              to_tx_status(outcome.status), ts));
    ctx.record_outcome(req.payment_id, st->terminal.terminal_id, outcome);
    if (outcome.status == OutcomeStatus::success) result.success = true;
  }
  return result;
}

// Uniformly random pick from the static-filtered list; retries draw the
// next element of a random permutation. Feedback goes straight to the store.
inline PaymentResult drive_random(const ScenarioConfig& cfg, RoutingContext& ctx,
                                  const PaymentRequest& req, TimestampMs ts, Rng& rng,
                                  std::vector<TxRecord>& log) {
  static const RuleSet kNoRules;
  PaymentResult result;
  StaticFilterResult filtered;
  try {
    filtered = static_filter(req, cfg.terminals, ctx.rules() ? *ctx.rules() : kNoRules,
                             ctx.downtime(), ctx.store(), ts);
  } catch (const NoEligibleTerminalsError&) {
    log.push_back(make_record(req, "", "", TxStatus::failed_to_route, ts));
    result.routed = false;
    return result;
  }
  std::vector<Terminal> order = filtered.terminals;
  rng.shuffle(order);
  std::size_t max_attempts = std::min(order.size(), ctx.max_retries() + 1);
  for (std::size_t i = 0; i < max_attempts; ++i) {
    const Terminal& t = order[i];
    ++result.attempts;
    Outcome outcome = simulate_attempt(cfg.profile(t.terminal_id), req, ts, rng);
    log.push_back(make_record(req, t.terminal_id, t.gateway_id, to_tx_status(outcome.status), ts));
    ctx.store().apply_feedback(req, t.terminal_id, outcome);
    if (outcome.status == OutcomeStatus::success) {
      result.success = true;
      break;
    }
    if (outcome.status == OutcomeStatus::customer_failure) break;
  }
  return result;
}

inline PaymentResult drive_payment(const ScenarioConfig& cfg, RoutingContext& ctx, RouterMode mode,
                                   const PaymentRequest& req, TimestampMs ts, Rng& rng,
                                   std::vector<TxRecord>& log) {
  return mode == RouterMode::smart ? drive_smart(cfg, ctx, req, ts, rng, log)
                                   : drive_random(cfg, ctx, req, ts, rng, log);
}

class BucketAccumulator {
 public:
  explicit BucketAccumulator(std::size_t bucket_size) : bucket_size_(bucket_size) {}

  void add(std::size_t payment_index, std::size_t attempts, bool success) {
    std::size_t b = payment_index / bucket_size_;
    if (b >= attempts_.size()) {
      attempts_.resize(b + 1, 0);
      successes_.resize(b + 1, 0);
    }
    attempts_[b] += attempts;
    if (success) ++successes_[b];
  }

  void emit(const std::string& arm, std::vector<TimelineRow>& rows) const {
    for (std::size_t b = 0; b < attempts_.size(); ++b) {
      double sr = attempts_[b] == 0
                      ? 0.0
                      : static_cast<double>(successes_[b]) / static_cast<double>(attempts_[b]);
      rows.push_back({b, arm, sr});
    }
  }

 private:
  std::size_t bucket_size_;
  std::vector<std::size_t> attempts_;
  std::vector<std::size_t> successes_;
};

}  // namespace detail

// Single-arm scenario run. Emits a complete, replayable attempt log.
inline ScenarioResult run_scenario(const ScenarioConfig& cfg, RoutingContext& ctx,
                                   RouterMode mode = RouterMode::smart,
                                   std::size_t bucket_size = 500) {
  cfg.validate();
  if (bucket_size == 0) throw ConfigError("bucket size must be >= 1");
  for (const auto& t : cfg.terminals) ctx.store().register_terminal(t);

  ScenarioResult result;
  result.stats.name = mode == RouterMode::smart ? "smart" : "random";
  detail::BucketAccumulator buckets(bucket_size);
  Rng rng(cfg.seed);

  for (std::size_t i = 0; i < cfg.payments; ++i) {
    TimestampMs ts = cfg.arrival_ts(i);
    PaymentRequest req = generate_payment(cfg, rng, ts, i);
    detail::PaymentResult pr = detail::drive_payment(cfg, ctx, mode, req, ts, rng, result.log);
    ++result.stats.payments;
    result.stats.attempts += pr.attempts;
    if (pr.success) ++result.stats.successes;
    if (pr.attempts > 1) result.stats.retries += pr.attempts - 1;
    if (!pr.routed) ++result.stats.failed_to_route;
    buckets.add(i, pr.attempts, pr.success);
  }
  buckets.emit(result.stats.name, result.timeline);
  return result;
}

struct ABReport {
  ArmStats random;
  ArmStats smart;
  std::size_t bucket_size = 500;
  std::vector<TimelineRow> timeline;

  double gap() const { return smart.sr() - random.sr(); }
};

enum class Arm : std::uint8_t { random = 0, smart = 1 };

struct ArmTaggedRecord {
  TxRecord record;
  Arm arm = Arm::random;
  std::size_t arm_payment_index = 0;
};

struct ABResult {
  ABReport report;
  std::vector<ArmTaggedRecord> records;
};

struct AbSetup {
  std::vector<FeatureTemplate> templates;
  double alpha = 1.0;
  const RuleSet* rules = nullptr;
  const TrainedForest* forest = nullptr;
  const DowntimeModel* downtime = nullptr;
  std::size_t max_retries = 2;
  std::size_t bucket_size = 500;
};

// A/B experiment: traffic split by a seeded hash of payment_id; the random
// arm picks uniformly from the static-filtered list, the smart arm runs the
// full pipeline. Each arm owns an isolated feature store.
inline ABResult run_ab(const ScenarioConfig& cfg, std::size_t n_payments, std::uint64_t seed,
                       const AbSetup& setup) {
  cfg.validate();
  if (setup.forest == nullptr || setup.downtime == nullptr) {
    throw ValidationError("run_ab requires a trained forest and downtime model");
  }
  if (setup.bucket_size == 0) throw ConfigError("bucket size must be >= 1");

  FeatureStore random_store(setup.templates, setup.alpha);
  FeatureStore smart_store(setup.templates, setup.alpha);
  for (const auto& t : cfg.terminals) {
    random_store.register_terminal(t);
    smart_store.register_terminal(t);
  }
  RoutingContext random_ctx(random_store, nullptr, setup.downtime, setup.rules, setup.max_retries);
  RoutingContext smart_ctx(smart_store, setup.forest, setup.downtime, setup.rules,
                           setup.max_retries);

  ABResult result;
  result.report.bucket_size = setup.bucket_size;
  result.report.random.name = "random";
  result.report.smart.name = "smart";
  detail::BucketAccumulator random_buckets(setup.bucket_size);
  detail::BucketAccumulator smart_buckets(setup.bucket_size);

  Rng rng(seed);
  std::vector<TxRecord> attempt_log;
  for (std::size_t i = 0; i < n_payments; ++i) {
    TimestampMs ts = cfg.arrival_ts(i);
    PaymentRequest req = generate_payment(cfg, rng, ts, i);
    bool smart_arm = (fnv1a64(req.payment_id, 0xcbf29ce484222325ULL ^ seed) & 1) == 1;

    RoutingContext& ctx = smart_arm ? smart_ctx : random_ctx;
    RouterMode mode = smart_arm ? RouterMode::smart : RouterMode::random_pick;
    ArmStats& stats = smart_arm ? result.report.smart : result.report.random;
    detail::BucketAccumulator& buckets = smart_arm ? smart_buckets : random_buckets;

    std::size_t arm_index = stats.payments;
    attempt_log.clear();
    detail::PaymentResult pr = detail::drive_payment(cfg, ctx, mode, req, ts, rng, attempt_log);
    for (auto& rec : attempt_log) {
      result.records.push_back({std::move(rec), smart_arm ? Arm::smart : Arm::random, arm_index});
    }
    ++stats.payments;
    stats.attempts += pr.attempts;
    if (pr.success) ++stats.successes;
    if (pr.attempts > 1) stats.retries += pr.attempts - 1;
    if (!pr.routed) ++stats.failed_to_route;
    buckets.add(arm_index, pr.attempts, pr.success);
  }
  random_buckets.emit("random", result.report.timeline);
  smart_buckets.emit("smart", result.report.timeline);
  return result;
}

inline void write_arm_stats(std::ostream& out, const ArmStats& s) {
  char sr_buf[64], psr_buf[64];
  std::snprintf(sr_buf, sizeof(sr_buf), "%.6f", s.sr());
  std::snprintf(psr_buf, sizeof(psr_buf), "%.6f", s.payment_sr());
  out << "arm " << s.name << ": payments=" << s.payments << " attempts=" << s.attempts
      << " successes=" << s.successes << " sr=" << sr_buf << " payment_sr=" << psr_buf
      << " retries=" << s.retries << " failed_to_route=" << s.failed_to_route << '\n';
}

inline void write_ab_report(std::ostream& out, const ABReport& r) {
  out << "ab-report v1\n";
  write_arm_stats(out, r.random);
  write_arm_stats(out, r.smart);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", r.gap());
  out << "sr_gap(smart-random)=" << buf << '\n';
  out << "bucket_size=" << r.bucket_size << '\n';
}

// Delimited timeline ready for external plotting: bucket_index,arm,sr
inline void write_timeline(std::ostream& out, const std::vector<TimelineRow>& rows) {
  out << "bucket_index,arm,sr\n";
  char buf[64];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.6f", row.sr);
    out << row.bucket << ',' << row.arm << ',' << buf << '\n';
  }
}

}  // namespace smartroute
