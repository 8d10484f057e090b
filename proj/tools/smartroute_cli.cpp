// smartroute command line: the full lifecycle from synthetic data generation
// through feature selection, training, simulation, A/B evaluation and the
// line-protocol routing service.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smartroute/smartroute.hpp"

#ifdef __unix__
#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>
#include <csignal>
#include <thread>
#endif

namespace fs = std::filesystem;
using namespace smartroute;

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory: " + dir);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
}

struct LoadedModels {
  TrainedForest forest;
  DowntimeModel downtime;
};

LoadedModels load_models(const std::string& dir, double threshold) {
  LoadedModels m;
  m.forest = deserialize_forest(read_file_bytes(dir + "/forest.model"));
  m.downtime.model = deserialize_logistic(read_file_bytes(dir + "/downtime.model"));
  m.downtime.threshold = threshold;
  m.downtime.validate();
  return m;
}

RuleSet load_rules(const AppConfig& app, std::span<const Terminal> terminals) {
  if (!app.rules_file) return RuleSet{};
  std::vector<std::string> warnings;
  RuleSet rules = RuleSet::load_file(*app.rules_file, terminals, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return rules;
}

// Column subset listed in a select-features manifest, applied to a dataset.
std::vector<std::size_t> manifest_columns(const std::string& path, const Dataset& ds) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open feature manifest: " + path);
  std::vector<std::size_t> cols;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string name;
    ls >> name;
    auto it = std::find(ds.feature_names.begin(), ds.feature_names.end(), name);
    if (it == ds.feature_names.end()) {
      throw ConfigError("manifest feature '" + name + "' is not in the dataset");
    }
    cols.push_back(static_cast<std::size_t>(it - ds.feature_names.begin()));
  }
  if (cols.empty()) throw ConfigError("feature manifest lists no features: " + path);
  return cols;
}

int cmd_gen_data(const AppConfig& app, const std::string& scenario_path, const std::string& out_dir,
                 std::optional<std::size_t> payments, std::optional<std::uint64_t> seed) {
  ScenarioConfig scenario = ScenarioConfig::load_file(scenario_path);
  if (payments) scenario.payments = *payments;
  if (seed) scenario.seed = *seed;
  ensure_dir(out_dir);

  FeatureStore store(app.templates, app.alpha);
  RuleSet rules = load_rules(app, scenario.terminals);
  RoutingContext ctx(store, nullptr, nullptr, &rules, app.max_retries);
  ScenarioResult result = run_scenario(scenario, ctx, RouterMode::random_pick, app.ab_bucket_size);

  write_txlog_file(out_dir + "/transactions.jsonl", result.log);
  std::ostringstream report;
  report << "scenario-report v1\n";
  write_arm_stats(report, result.stats);
  write_text(out_dir + "/report.txt", report.str());
  std::ostringstream timeline;
  write_timeline(timeline, result.timeline);
  write_text(out_dir + "/timeline.csv", timeline.str());
  std::cout << "wrote " << result.log.size() << " attempt records to " << out_dir
            << "/transactions.jsonl\n";
  return 0;
}

int cmd_build_dataset(const AppConfig& app, const std::string& log_path,
                      const std::string& out_dir) {
  auto records = read_txlog_file(log_path);
  Dataset ds = build_training_set(records, app.templates, app.alpha);
  ensure_dir(out_dir);
  write_dataset_file(out_dir + "/dataset.csv", ds);
  std::cout << "wrote " << ds.rows.size() << " rows x " << ds.n_features() << " features to "
            << out_dir << "/dataset.csv\n";
  return 0;
}

int cmd_select_features(const AppConfig& app, const std::string& log_path,
                        const std::string& out_dir) {
  auto records = read_txlog_file(log_path);
  Dataset ds = build_training_set(records, app.templates, app.alpha);
  if (ds.rows.empty()) throw ValidationError("log produced an empty dataset");

  ForestParams params = app.forest;
  params.seed = app.seed;
  std::size_t target = std::min(app.rfe_target, ds.n_features());
  RfeResult rfe_result = rfe(ds, target, params, app.rfe_drop_fraction);
  Dataset reduced = ds.select(rfe_result.selected);
  VifResult vif_result = vif_filter(reduced, app.vif_threshold);
  Dataset final_ds = reduced.select(vif_result.selected);

  ensure_dir(out_dir);
  std::ostringstream manifest;
  manifest << "# feature manifest: one surviving feature per line (name, final VIF)\n";
  manifest << "# schema_id " << ds.schema_id << "\n";
  char buf[64];
  for (std::size_t i = 0; i < final_ds.feature_names.size(); ++i) {
    double v = i < vif_result.final_vifs.size() ? vif_result.final_vifs[i] : 1.0;
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    manifest << final_ds.feature_names[i] << " " << buf << "\n";
  }
  manifest << "# eliminated by rfe, in drop order:";
  for (std::size_t idx : rfe_result.eliminated_order) manifest << " " << ds.feature_names[idx];
  manifest << "\n# eliminated by vif, in drop order:";
  for (std::size_t idx : vif_result.dropped_order) manifest << " " << reduced.feature_names[idx];
  manifest << "\n";
  write_text(out_dir + "/feature_manifest.txt", manifest.str());
  std::cout << "selected " << final_ds.n_features() << " of " << ds.n_features()
            << " features; manifest at " << out_dir << "/feature_manifest.txt\n";
  return 0;
}

int cmd_train(const AppConfig& app, const std::string& log_path, const std::string& scenario_path,
              const std::string& out_dir, const std::string& features_path, bool with_grid) {
  auto records = read_txlog_file(log_path);
  Dataset ds = build_training_set(records, app.templates, app.alpha);
  if (ds.rows.empty()) throw ValidationError("log produced an empty dataset");
  if (!features_path.empty()) ds = ds.select(manifest_columns(features_path, ds));

  // time-ordered split: first 80% trains, the tail evaluates
  std::size_t cut = ds.rows.size() * 8 / 10;
  if (cut == 0 || cut == ds.rows.size()) throw ValidationError("dataset too small to split");
  Dataset train_ds = ds.slice(0, cut);
  Dataset eval_ds = ds.slice(cut, ds.rows.size());

  ForestParams params = app.forest;
  params.seed = app.seed;
  std::ostringstream metrics;
  metrics << "train-report v1\n";
  if (with_grid) {
    GridSpec grid = app.grid;
    grid.seed = app.seed;
    GridResult gr = grid_search(train_ds, grid, params);
    params = gr.best;
    params.seed = app.seed;
    metrics << "grid: best n_trees=" << params.n_trees << " max_depth=" << params.max_depth
            << " min_samples_leaf=" << params.min_samples_leaf << "\n";
    for (const auto& w : gr.warnings) std::cerr << "warning: " << w << "\n";
  }
  TrainedForest forest = train_forest(train_ds, params);

  std::vector<double> scores;
  scores.reserve(eval_ds.rows.size());
  for (const auto& row : eval_ds.rows) scores.push_back(forest.probability_raw(row));
  char buf[64];
  MetricsCounts counts = confusion_counts(scores, eval_ds.labels);
  if (counts.tp + counts.fp > 0) {
    std::snprintf(buf, sizeof(buf), "%.6f", precision(counts));
    metrics << "forest precision@0.5=" << buf << "\n";
  } else {
    metrics << "forest precision@0.5=undefined (no predicted positives)\n";
  }
  bool two_class = false;
  {
    bool pos = false, neg = false;
    for (int l : eval_ds.labels) (l == 1 ? pos : neg) = true;
    two_class = pos && neg;
  }
  if (two_class) {
    std::snprintf(buf, sizeof(buf), "%.6f", roc_auc(scores, eval_ds.labels));
    metrics << "forest roc_auc=" << buf << "\n";
  } else {
    metrics << "forest roc_auc=undefined (single-class evaluation split)\n";
  }

  // gateway downtime detector, labeled by the scenario's injected outages
  ScenarioConfig scenario = ScenarioConfig::load_file(scenario_path);
  Dataset downtime_ds = build_downtime_training_set(records, app.templates, app.alpha,
                                                    scenario.outage_labels());
  bool downtime_two_class = false;
  {
    bool pos = false, neg = false;
    for (int l : downtime_ds.labels) (l == 1 ? pos : neg) = true;
    downtime_two_class = pos && neg;
  }
  if (!downtime_two_class) {
    throw ValidationError(
        "downtime training needs both healthy and outage rows; "
        "use a training scenario with at least one gateway outage");
  }
  TrainedLogistic downtime = train_logistic(downtime_ds, app.logistic);
  {
    std::vector<double> dscores;
    dscores.reserve(downtime_ds.rows.size());
    for (const auto& row : downtime_ds.rows) dscores.push_back(downtime.probability_raw(row));
    std::snprintf(buf, sizeof(buf), "%.6f", roc_auc(dscores, downtime_ds.labels));
    metrics << "downtime roc_auc=" << buf << "\n";
  }

  ensure_dir(out_dir);
  write_file_bytes(out_dir + "/forest.model", serialize_forest(forest));
  write_file_bytes(out_dir + "/downtime.model", serialize_logistic(downtime));
  write_text(out_dir + "/metrics.txt", metrics.str());
  write_text(out_dir + "/schema_manifest.txt", schema_manifest(app.templates, app.alpha));
  std::cout << metrics.str();
  std::cout << "models written to " << out_dir << "\n";
  return 0;
}

int cmd_simulate(const AppConfig& app, const std::string& scenario_path,
                 const std::string& models_dir, const std::string& out_dir,
                 std::optional<std::size_t> payments, std::optional<std::uint64_t> seed) {
  ScenarioConfig scenario = ScenarioConfig::load_file(scenario_path);
  if (payments) scenario.payments = *payments;
  if (seed) scenario.seed = *seed;
  LoadedModels models = load_models(models_dir, app.downtime_threshold);

  FeatureStore store(app.templates, app.alpha);
  RuleSet rules = load_rules(app, scenario.terminals);
  RoutingContext ctx(store, &models.forest, &models.downtime, &rules, app.max_retries);
  ScenarioResult result = run_scenario(scenario, ctx, RouterMode::smart, app.ab_bucket_size);

  ensure_dir(out_dir);
  write_txlog_file(out_dir + "/transactions.jsonl", result.log);
  std::ostringstream report;
  report << "scenario-report v1\n";
  write_arm_stats(report, result.stats);
  write_text(out_dir + "/report.txt", report.str());
  std::ostringstream timeline;
  write_timeline(timeline, result.timeline);
  write_text(out_dir + "/timeline.csv", timeline.str());
  std::cout << report.str();
  return 0;
}

int cmd_ab_test(const AppConfig& app, const std::string& scenario_path,
                const std::string& models_dir, const std::string& out_dir,
                std::optional<std::size_t> payments, std::optional<std::uint64_t> seed) {
  ScenarioConfig scenario = ScenarioConfig::load_file(scenario_path);
  LoadedModels models = load_models(models_dir, app.downtime_threshold);
  RuleSet rules = load_rules(app, scenario.terminals);

  AbSetup setup;
  setup.templates = app.templates;
  setup.alpha = app.alpha;
  setup.rules = &rules;
  setup.forest = &models.forest;
  setup.downtime = &models.downtime;
  setup.max_retries = app.max_retries;
  setup.bucket_size = app.ab_bucket_size;

  std::size_t n = payments ? *payments : scenario.payments;
  std::uint64_t s = seed ? *seed : scenario.seed;
  ABResult result = run_ab(scenario, n, s, setup);

  ensure_dir(out_dir);
  std::ostringstream report;
  write_ab_report(report, result.report);
  write_text(out_dir + "/ab_report.txt", report.str());
  std::ostringstream timeline;
  write_timeline(timeline, result.report.timeline);
  write_text(out_dir + "/ab_timeline.csv", timeline.str());
  std::vector<TxRecord> random_log, smart_log;
  for (const auto& rec : result.records) {
    (rec.arm == Arm::smart ? smart_log : random_log).push_back(rec.record);
  }
  write_txlog_file(out_dir + "/random_arm.jsonl", random_log);
  write_txlog_file(out_dir + "/smart_arm.jsonl", smart_log);
  std::cout << report.str();
  return 0;
}

int cmd_replay(const AppConfig& app, const std::string& log_path, const std::string& snapshot_path,
               const std::string& scenario_path) {
  auto records = read_txlog_file(log_path);
  std::vector<Terminal> initial;
  if (!scenario_path.empty()) initial = ScenarioConfig::load_file(scenario_path).terminals;
  FeatureStore store = replay_store(records, app.templates, app.alpha, initial);
  write_file_bytes(snapshot_path, store.snapshot());
  std::cout << "replayed " << records.size() << " records into " << snapshot_path << "\n";
  return 0;
}

#ifdef __unix__
int run_tcp(Service& service, const std::string& addr) {
  auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw ConfigError("--listen expects HOST:PORT or 'stdio'");
  std::string host = addr.substr(0, colon);
  int port = std::stoi(addr.substr(colon + 1));

  int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0) throw IoError("socket() failed");
  int one = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1) {
    ::close(listener);
    throw ConfigError("bad listen address: " + host);
  }
  if (::bind(listener, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0 ||
      ::listen(listener, 16) != 0) {
    ::close(listener);
    throw IoError("cannot listen on " + addr);
  }
  std::signal(SIGPIPE, SIG_IGN);
  std::cerr << "listening on " << addr << "\n";
  for (;;) {
    int conn = ::accept(listener, nullptr, nullptr);
    if (conn < 0) continue;
    std::thread([conn, &service] {
      std::string buffer;
      char chunk[4096];
      for (;;) {
        ssize_t n = ::read(conn, chunk, sizeof(chunk));
        if (n <= 0) break;
        buffer.append(chunk, static_cast<std::size_t>(n));
        std::size_t pos;
        while ((pos = buffer.find('\n')) != std::string::npos) {
          std::string line = buffer.substr(0, pos);
          buffer.erase(0, pos + 1);
          if (line.empty()) continue;
          std::string response = service.handle_line(line) + "\n";
          std::size_t off = 0;
          while (off < response.size()) {
            ssize_t w = ::write(conn, response.data() + off, response.size() - off);
            if (w <= 0) break;
            off += static_cast<std::size_t>(w);
          }
        }
      }
      ::close(conn);
    }).detach();
  }
}
#endif

int cmd_serve(const AppConfig& app, const std::string& models_dir, const std::string& listen,
              const std::string& snapshot_in, const std::string& snapshot_out,
              const std::string& scenario_path) {
  LoadedModels models = load_models(models_dir, app.downtime_threshold);

  FeatureStore store(app.templates, app.alpha);
  if (!snapshot_in.empty()) {
    store = FeatureStore::restore(read_file_bytes(snapshot_in));
    if (store.schema_id() != schema_id_of(schema_manifest(app.templates, app.alpha))) {
      throw SchemaError("snapshot schema does not match the configured feature templates");
    }
  }
  if (!scenario_path.empty()) {
    for (const auto& t : ScenarioConfig::load_file(scenario_path).terminals) {
      store.register_terminal(t);
    }
  }
  if (store.registered_terminals().empty()) {
    throw ConfigError("no terminals registered; pass --scenario or a snapshot with terminals");
  }

  RuleSet rules = load_rules(app, store.registered_terminals());
  RoutingContext ctx(store, &models.forest, &models.downtime, &rules, app.max_retries);
  Service service(ctx, snapshot_out.empty() ? "store.snapshot" : snapshot_out);
  if (listen == "stdio") {
    service.run_stdio(std::cin, std::cout);
    return 0;
  }
#ifdef __unix__
  return run_tcp(service, listen);
#else
  throw ConfigError("TCP serving is only available on unix builds; use --listen stdio");
#endif
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"smart payment routing toolkit"};
  cli.require_subcommand(1);

  std::string config_path, scenario_path, log_path, models_dir, out_dir = "out";
  std::string features_path, snapshot_in, snapshot_out, listen = "stdio";
  std::optional<std::size_t> payments;
  std::optional<std::uint64_t> seed;
  bool with_grid = false;

  cli.add_option("--config", config_path, "app config JSON path")->required();

  auto add_payments_seed = [&](CLI::App* cmd) {
    cmd->add_option("--payments", payments, "override payment count");
    cmd->add_option("--seed", seed, "override rng seed");
  };

  auto* gen = cli.add_subcommand("gen-data", "run a random-routing exploration scenario");
  gen->add_option("--scenario", scenario_path, "scenario JSON path")->required();
  gen->add_option("--out", out_dir, "output directory");
  add_payments_seed(gen);

  auto* build = cli.add_subcommand("build-dataset", "replay a transaction log into a dataset");
  build->add_option("--log", log_path, "transaction log path")->required();
  build->add_option("--out", out_dir, "output directory");

  auto* select = cli.add_subcommand("select-features", "RFE then VIF feature selection");
  select->add_option("--log", log_path, "transaction log path")->required();
  select->add_option("--out", out_dir, "output directory");

  auto* train = cli.add_subcommand("train", "train the forest and the downtime detector");
  train->add_option("--log", log_path, "transaction log path")->required();
  train->add_option("--scenario", scenario_path, "scenario JSON (outage ground truth)")->required();
  train->add_option("--out", out_dir, "output directory");
  train->add_option("--features", features_path, "feature manifest from select-features");
  train->add_flag("--grid", with_grid, "grid-search forest hyperparameters");

  auto* sim = cli.add_subcommand("simulate", "run a smart-routing scenario with trained models");
  sim->add_option("--scenario", scenario_path, "scenario JSON path")->required();
  sim->add_option("--models", models_dir, "directory with forest.model/downtime.model")->required();
  sim->add_option("--out", out_dir, "output directory");
  add_payments_seed(sim);

  auto* ab = cli.add_subcommand("ab-test", "random vs smart A/B experiment");
  ab->add_option("--scenario", scenario_path, "scenario JSON path")->required();
  ab->add_option("--models", models_dir, "directory with forest.model/downtime.model")->required();
  ab->add_option("--out", out_dir, "output directory");
  add_payments_seed(ab);

  auto* replay = cli.add_subcommand("replay", "rebuild a feature store from a log");
  replay->add_option("--log", log_path, "transaction log path")->required();
  replay->add_option("--snapshot", snapshot_out, "snapshot output path")->required();
  replay->add_option("--scenario", scenario_path, "scenario JSON for the terminal registry");

  auto* serve = cli.add_subcommand("serve", "line-protocol routing service");
  serve->add_option("--models", models_dir, "directory with forest.model/downtime.model")->required();
  serve->add_option("--listen", listen, "stdio or HOST:PORT");
  serve->add_option("--snapshot", snapshot_in, "restore the store from this snapshot");
  serve->add_option("--snapshot-out", snapshot_out, "default path for snapshot messages");
  serve->add_option("--scenario", scenario_path, "scenario JSON for the terminal registry");

  CLI11_PARSE(cli, argc, argv);

  try {
    AppConfig app = AppConfig::load_file(config_path);
    if (gen->parsed()) return cmd_gen_data(app, scenario_path, out_dir, payments, seed);
    if (build->parsed()) return cmd_build_dataset(app, log_path, out_dir);
    if (select->parsed()) return cmd_select_features(app, log_path, out_dir);
    if (train->parsed()) return cmd_train(app, log_path, scenario_path, out_dir, features_path, with_grid);
    if (sim->parsed()) return cmd_simulate(app, scenario_path, models_dir, out_dir, payments, seed);
    if (ab->parsed()) return cmd_ab_test(app, scenario_path, models_dir, out_dir, payments, seed);
    if (replay->parsed()) return cmd_replay(app, log_path, snapshot_out, scenario_path);
    if (serve->parsed()) return cmd_serve(app, models_dir, listen, snapshot_in, snapshot_out, scenario_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
