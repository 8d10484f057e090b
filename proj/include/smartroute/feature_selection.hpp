#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "smartroute/dataset.hpp"
#include "smartroute/errors.hpp"
#include "smartroute/forest.hpp"

namespace smartroute {

namespace detail {

// Solve A w = b by Gaussian elimination with partial pivoting. A tiny ridge
// term keeps rank-deficient systems solvable; callers judge the fit by the
// residual, not the solution, so the perturbation is harmless.
inline std::vector<double> solve_ridged(std::vector<std::vector<double>> a,
                                        std::vector<double> b) {
  std::size_t d = b.size();
  double trace = 0.0;
  for (std::size_t i = 0; i < d; ++i) trace += a[i][i];
  double ridge = 1e-10 * (trace > 0.0 ? trace / static_cast<double>(d) : 1.0);
  for (std::size_t i = 0; i < d; ++i) a[i][i] += ridge;

  for (std::size_t col = 0; col < d; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < d; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    double piv = a[col][col];
    if (piv == 0.0) continue;  // fully zero column; weight stays 0
    for (std::size_t r = col + 1; r < d; ++r) {
      double factor = a[r][col] / piv;
      if (factor == 0.0) continue;
      for (std::size_t c = col; c < d; ++c) a[r][c] -= factor * a[col][c];
      b[r] -= factor * b[col];
    }
  }
  std::vector<double> w(d, 0.0);
  for (std::size_t i = d; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < d; ++c) s -= a[i][c] * w[c];
    w[i] = a[i][i] != 0.0 ? s / a[i][i] : 0.0;
  }
  return w;
}

// R^2 of column `target` regressed (with intercept) on columns `predictors`.
inline double r_squared(const Dataset& ds, std::size_t target,
                        const std::vector<std::size_t>& predictors) {
  std::size_t n = ds.rows.size();
  std::size_t d = predictors.size() + 1;  // + intercept
  std::vector<std::vector<double>> xtx(d, std::vector<double>(d, 0.0));
  std::vector<double> xty(d, 0.0);
  std::vector<double> xi(d);
  for (std::size_t i = 0; i < n; ++i) {
    xi[0] = 1.0;
    for (std::size_t j = 0; j < predictors.size(); ++j) xi[j + 1] = ds.rows[i][predictors[j]];
    double y = ds.rows[i][target];
    for (std::size_t a = 0; a < d; ++a) {
      xty[a] += xi[a] * y;
      for (std::size_t b = a; b < d; ++b) xtx[a][b] += xi[a] * xi[b];
    }
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < a; ++b) xtx[a][b] = xtx[b][a];
  }
  std::vector<double> w = solve_ridged(std::move(xtx), std::move(xty));

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += ds.rows[i][target];
  mean /= static_cast<double>(n);
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = w[0];
    for (std::size_t j = 0; j < predictors.size(); ++j) {
      pred += w[j + 1] * ds.rows[i][predictors[j]];
    }
    double y = ds.rows[i][target];
    sse += (y - pred) * (y - pred);
    sst += (y - mean) * (y - mean);
  }
  if (sst <= 0.0) return 1.0;  // constant target: perfectly "explained"
  double r2 = 1.0 - sse / sst;
  return std::clamp(r2, 0.0, 1.0);
}

inline double column_variance(const Dataset& ds, std::size_t col) {
  std::size_t n = ds.rows.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += ds.rows[i][col];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = ds.rows[i][col] - mean;
    var += d * d;
  }
  return var / static_cast<double>(n);
}

}  // namespace detail

inline double vif_of(const Dataset& ds, std::size_t target,
                     const std::vector<std::size_t>& others) {
  double r2 = detail::r_squared(ds, target, others);
  if (r2 >= 1.0 - 1e-12) return std::numeric_limits<double>::infinity();
  return 1.0 / (1.0 - r2);
}

struct VifResult {
  std::vector<std::size_t> selected;       // column positions, ascending
  std::vector<double> final_vifs;          // aligned with selected
  std::vector<std::size_t> dropped_order;  // column positions, in drop order
};

// Iteratively drop the max-VIF column while it strictly exceeds the
// threshold; a value sitting on the threshold is retained, with a tiny
// epsilon so the boundary is stable under round-off. Zero-variance columns
// go first; perfectly collinear columns have unbounded VIF and go
// immediately. Ties drop the higher index, so the earliest of two
// duplicates survives.
inline constexpr double kVifBoundaryEpsilon = 1e-9;

inline VifResult vif_filter(const Dataset& ds, double threshold = 5.0) {
  ds.validate();
  if (ds.n_features() < 2) throw ValidationError("vif_filter needs at least 2 features");
  VifResult result;
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < ds.n_features(); ++j) {
    if (detail::column_variance(ds, j) <= 1e-18) {
      result.dropped_order.push_back(j);
    } else {
      active.push_back(j);
    }
  }

  std::vector<double> vifs;
  while (active.size() >= 2) {
    vifs.assign(active.size(), 1.0);
    double max_vif = -1.0;
    std::size_t max_pos = 0;
    for (std::size_t p = 0; p < active.size(); ++p) {
      std::vector<std::size_t> others;
      others.reserve(active.size() - 1);
      for (std::size_t q = 0; q < active.size(); ++q) {
        if (q != p) others.push_back(active[q]);
      }
      vifs[p] = vif_of(ds, active[p], others);
      if (vifs[p] >= max_vif) {  // >= drops the later of tied columns
        max_vif = vifs[p];
        max_pos = p;
      }
    }
    if (!(max_vif > threshold * (1.0 + kVifBoundaryEpsilon))) break;
    result.dropped_order.push_back(active[max_pos]);
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(max_pos));
  }

  result.selected = active;
  if (active.size() >= 2) {
    result.final_vifs.assign(active.size(), 1.0);
    for (std::size_t p = 0; p < active.size(); ++p) {
      std::vector<std::size_t> others;
      for (std::size_t q = 0; q < active.size(); ++q) {
        if (q != p) others.push_back(active[q]);
      }
      result.final_vifs[p] = vif_of(ds, active[p], others);
    }
  } else {
    result.final_vifs.assign(active.size(), 1.0);
  }
  return result;
}

struct RfeResult {
  std::vector<std::size_t> selected;          // column positions, ascending
  std::vector<std::size_t> eliminated_order;  // column positions, in drop order
};

// Recursive feature elimination: fit a forest, drop the least important
// max(1, ceil(drop_fraction * remaining)) columns, repeat until
// target_count remain.
inline RfeResult rfe(const Dataset& ds, std::size_t target_count, const ForestParams& params,
                     double drop_fraction = 0.1) {
  ds.validate();
  if (target_count < 1 || target_count > ds.n_features()) {
    throw ValidationError("rfe target_count out of range");
  }
  if (drop_fraction < 0.0 || drop_fraction >= 1.0) {
    throw ConfigError("drop_fraction must be in [0, 1)");
  }

  RfeResult result;
  std::vector<std::size_t> active(ds.n_features());
  std::iota(active.begin(), active.end(), 0);

  std::size_t iteration = 0;
  while (active.size() > target_count) {
    Dataset sub = ds.select(active);
    ForestParams p = params;
    p.seed = mix64(params.seed, 0x726665ULL + iteration);
    TrainedForest forest = train_forest(sub, p);
    std::vector<double> importance = impurity_importance(forest);

    std::size_t want = static_cast<std::size_t>(
        std::ceil(drop_fraction * static_cast<double>(active.size())));
    std::size_t k = std::min(std::max<std::size_t>(want, 1), active.size() - target_count);

    std::vector<std::size_t> order(active.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (importance[a] != importance[b]) return importance[a] < importance[b];
      return a < b;
    });
    std::vector<bool> drop(active.size(), false);
    for (std::size_t i = 0; i < k; ++i) {
      drop[order[i]] = true;
      result.eliminated_order.push_back(active[order[i]]);
    }
    std::vector<std::size_t> next;
    next.reserve(active.size() - k);
    for (std::size_t i = 0; i < active.size(); ++i) {
      if (!drop[i]) next.push_back(active[i]);
    }
    active = std::move(next);
    ++iteration;
  }
  result.selected = active;
  return result;
}

}  // namespace smartroute
