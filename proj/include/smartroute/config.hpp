#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "smartroute/errors.hpp"
#include "smartroute/feature_store.hpp"
#include "smartroute/grid_search.hpp"
#include "smartroute/logistic.hpp"
#include "smartroute/tree.hpp"

namespace smartroute {

// Everything the CLI and service need in one place. All randomness is
// seeded from here; nothing reads the wall clock.
struct AppConfig {
  std::vector<FeatureTemplate> templates = default_templates();
  double alpha = 1.0;
  std::optional<std::string> rules_file;
  ForestParams forest;
  LogisticParams logistic;
  GridSpec grid;
  bool use_grid = false;
  double vif_threshold = 5.0;
  std::size_t rfe_target = 12;
  double rfe_drop_fraction = 0.1;
  std::size_t max_retries = 2;
  double downtime_threshold = 0.5;
  std::size_t ab_bucket_size = 500;
  std::uint64_t seed = 42;

  void validate() const {
    FeatureStore probe(templates, alpha);  // template/alpha validation
    (void)probe;
    forest.validate();
    logistic.validate();
    grid.validate();
    if (vif_threshold <= 0.0) throw ConfigError("vif_threshold must be positive");
    if (rfe_target < 1) throw ConfigError("rfe_target must be >= 1");
    if (rfe_drop_fraction < 0.0 || rfe_drop_fraction >= 1.0) {
      throw ConfigError("rfe_drop_fraction must be in [0, 1)");
    }
    if (downtime_threshold <= 0.0 || downtime_threshold >= 1.0) {
      throw ConfigError("downtime_threshold must be in (0, 1)");
    }
    if (ab_bucket_size < 1) throw ConfigError("ab_bucket_size must be >= 1");
    if (rules_file && !std::filesystem::exists(*rules_file)) {
      throw ConfigError("rules file does not exist: " + *rules_file);
    }
  }

  static AppConfig from_json(const nlohmann::json& j, const std::string& base_dir = "");
  static AppConfig load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config is not valid JSON: " + path);
    return from_json(j, std::filesystem::path(path).parent_path().string());
  }
};

inline FeatureTemplate parse_template_json(const nlohmann::json& tj) {
  FeatureTemplate t;
  t.level = parse_feature_level(tj.at("level").get<std::string>());
  if (tj.contains("attributes")) {
    for (const auto& a : tj.at("attributes")) t.attributes.push_back(parse_attribute(a.get<std::string>()));
  }
  const auto& w = tj.at("window");
  std::string kind = w.at("kind").get<std::string>();
  if (kind == "time") {
    t.window = WindowSpec::time(w.at("half_life_s").get<double>());
  } else if (kind == "event") {
    t.window = WindowSpec::event(w.at("events").get<std::size_t>());
  } else {
    throw ConfigError("template window kind must be 'time' or 'event'");
  }
  t.validate();
  return t;
}

inline AppConfig AppConfig::from_json(const nlohmann::json& j, const std::string& base_dir) {
  AppConfig cfg;
  try {
    if (j.contains("features")) {
      const auto& f = j.at("features");
      cfg.alpha = f.value("alpha", 1.0);
      if (f.contains("templates")) {
        cfg.templates.clear();
        for (const auto& tj : f.at("templates")) cfg.templates.push_back(parse_template_json(tj));
      } else {
        std::vector<double> hls = f.value("half_lives_s", std::vector<double>{5.0, 30.0, 60.0, 300.0});
        std::vector<std::size_t> evs = f.value("event_windows", std::vector<std::size_t>{10, 30});
        cfg.templates = default_templates(hls, evs);
      }
    }
    if (j.contains("rules_file")) {
      std::string p = j.at("rules_file").get<std::string>();
      if (!base_dir.empty() && !std::filesystem::path(p).is_absolute()) {
        p = (std::filesystem::path(base_dir) / p).string();
      }
      cfg.rules_file = p;
    }
    if (j.contains("forest")) {
      const auto& f = j.at("forest");
      cfg.forest.n_trees = f.value("n_trees", cfg.forest.n_trees);
      cfg.forest.max_depth = f.value("max_depth", cfg.forest.max_depth);
      cfg.forest.min_samples_leaf = f.value("min_samples_leaf", cfg.forest.min_samples_leaf);
      cfg.forest.feature_subsample = f.value("feature_subsample", cfg.forest.feature_subsample);
      cfg.forest.bootstrap = f.value("bootstrap", cfg.forest.bootstrap);
    }
    if (j.contains("logistic")) {
      const auto& l = j.at("logistic");
      cfg.logistic.learning_rate = l.value("learning_rate", cfg.logistic.learning_rate);
      cfg.logistic.epochs = l.value("epochs", cfg.logistic.epochs);
      cfg.logistic.l2 = l.value("l2", cfg.logistic.l2);
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      cfg.use_grid = true;
      cfg.grid.n_trees = g.value("n_trees", cfg.grid.n_trees);
      cfg.grid.max_depth = g.value("max_depth", cfg.grid.max_depth);
      cfg.grid.min_samples_leaf = g.value("min_samples_leaf", cfg.grid.min_samples_leaf);
      cfg.grid.folds = g.value("folds", cfg.grid.folds);
    }
    cfg.vif_threshold = j.value("vif_threshold", cfg.vif_threshold);
    cfg.rfe_target = j.value("rfe_target", cfg.rfe_target);
    cfg.rfe_drop_fraction = j.value("rfe_drop_fraction", cfg.rfe_drop_fraction);
    cfg.max_retries = j.value("max_retries", cfg.max_retries);
    cfg.downtime_threshold = j.value("downtime_threshold", cfg.downtime_threshold);
    cfg.ab_bucket_size = j.value("ab_bucket_size", cfg.ab_bucket_size);
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad app config: ") + e.what());
  }
  cfg.forest.seed = cfg.seed;
  cfg.grid.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

}  // namespace smartroute
