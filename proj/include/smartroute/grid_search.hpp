#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "smartroute/dataset.hpp"
#include "smartroute/errors.hpp"
#include "smartroute/forest.hpp"
#include "smartroute/metrics.hpp"

namespace smartroute {

struct GridSpec {
  std::vector<std::size_t> n_trees = {50, 100};
  std::vector<std::size_t> max_depth = {4, 8};
  std::vector<std::size_t> min_samples_leaf = {20};
  std::size_t folds = 3;
  std::uint64_t seed = 1;

  void validate() const {
    if (folds < 2) throw ConfigError("grid search needs at least 2 folds");
    if (n_trees.empty() || max_depth.empty() || min_samples_leaf.empty()) {
      throw ConfigError("grid must be non-empty in every dimension");
    }
  }
};

struct GridCell {
  ForestParams params;
  double mean_precision = 0.0;
  std::vector<double> fold_precisions;
};

struct GridResult {
  ForestParams best;
  std::vector<GridCell> cells;
  std::vector<std::string> warnings;
};

// Seeded k-fold cross validation maximizing mean validation precision at
// the 0.5 probability threshold. Ties go to the smaller model: fewer
// trees, then shallower. Folds with no predicted positives score 0.
inline GridResult grid_search(const Dataset& ds, const GridSpec& grid, const ForestParams& base) {
  grid.validate();
  ds.validate();
  if (ds.rows.size() < grid.folds) throw ValidationError("fewer rows than folds");

  std::vector<std::size_t> order(ds.rows.size());
  std::iota(order.begin(), order.end(), 0);
  Rng fold_rng(mix64(grid.seed, 0x666f6c64ULL));
  fold_rng.shuffle(order);
  std::vector<std::size_t> fold_of(ds.rows.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) fold_of[order[pos]] = pos % grid.folds;

  GridResult result;
  bool have_best = false;
  double best_score = -1.0;

  std::size_t cell_index = 0;
  for (std::size_t nt : grid.n_trees) {
    for (std::size_t depth : grid.max_depth) {
      for (std::size_t msl : grid.min_samples_leaf) {
        GridCell cell;
        cell.params = base;
        cell.params.n_trees = nt;
        cell.params.max_depth = depth;
        cell.params.min_samples_leaf = msl;

        double sum = 0.0;
        for (std::size_t f = 0; f < grid.folds; ++f) {
          Dataset train, val;
          train.schema_id = val.schema_id = ds.schema_id;
          train.feature_names = val.feature_names = ds.feature_names;
          train.feature_indices = val.feature_indices = ds.feature_indices;
          for (std::size_t i = 0; i < ds.rows.size(); ++i) {
            Dataset& dst = fold_of[i] == f ? val : train;
            dst.rows.push_back(ds.rows[i]);
            dst.labels.push_back(ds.labels[i]);
          }
          double p = 0.0;
          if (train.rows.empty() || val.rows.empty()) {
            result.warnings.push_back("fold " + std::to_string(f) + " degenerate; scored 0");
          } else {
            ForestParams fp = cell.params;
            fp.seed = mix64(grid.seed, mix64(cell_index, f));
            TrainedForest forest = train_forest(train, fp);
            std::vector<double> scores;
            scores.reserve(val.rows.size());
            for (const auto& row : val.rows) scores.push_back(forest.probability_raw(row));
            MetricsCounts c = confusion_counts(scores, val.labels);
            if (c.tp + c.fp == 0) {
              result.warnings.push_back("cell " + std::to_string(cell_index) + " fold " +
                                        std::to_string(f) +
                                        ": precision undefined (no predicted positives); scored 0");
            } else {
              p = precision(c);
            }
          }
          cell.fold_precisions.push_back(p);
          sum += p;
        }
        cell.mean_precision = sum / static_cast<double>(grid.folds);

        bool better = false;
        if (!have_best || cell.mean_precision > best_score) {
          better = true;
        } else if (cell.mean_precision == best_score) {
          if (cell.params.n_trees < result.best.n_trees ||
              (cell.params.n_trees == result.best.n_trees &&
               cell.params.max_depth < result.best.max_depth)) {
            better = true;
          }
        }
        if (better) {
          have_best = true;
          best_score = cell.mean_precision;
          result.best = cell.params;
        }
        result.cells.push_back(std::move(cell));
        ++cell_index;
      }
    }
  }
  return result;
}

}  // namespace smartroute
