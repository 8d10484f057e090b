#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "smartroute/dataset.hpp"
#include "smartroute/errors.hpp"
#include "smartroute/feature_store.hpp"

namespace smartroute {

struct LogisticParams {
  double learning_rate = 0.5;
  std::size_t epochs = 400;
  double l2 = 1e-4;

  void validate() const {
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (l2 < 0.0) throw ConfigError("l2 must be non-negative");
  }
};

struct TrainedLogistic {
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<double> means;   // standardization, applied internally
  std::vector<double> scales;  // > 0
  std::vector<std::string> feature_names;
  std::vector<std::size_t> feature_indices;
  std::string store_schema_id;

  double probability_raw(std::span<const double> projected) const {
    if (projected.size() != weights.size()) {
      throw SchemaError("vector width does not match logistic model");
    }
    double z = bias;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      z += weights[i] * (projected[i] - means[i]) / scales[i];
    }
    if (z > 40.0) z = 40.0;
    if (z < -40.0) z = -40.0;
    return 1.0 / (1.0 + std::exp(-z));
  }

  std::vector<double> project(const FeatureVector& v) const {
    if (v.schema_id != store_schema_id) {
      throw SchemaError("feature vector schema '" + v.schema_id +
                        "' does not match model schema '" + store_schema_id + "'");
    }
    std::vector<double> out;
    out.reserve(feature_indices.size());
    for (std::size_t idx : feature_indices) {
      if (idx >= v.values.size()) throw SchemaError("feature index out of range for vector");
      out.push_back(v.values[idx]);
    }
    return out;
  }
};

inline double logistic_probability(const TrainedLogistic& m, const FeatureVector& v) {
  return m.probability_raw(m.project(v));
}

// Full-batch gradient descent on L2-regularized mean log loss. The mean
// keeps fitted weights invariant under dataset duplication.
inline TrainedLogistic train_logistic(const Dataset& ds, const LogisticParams& params) {
  params.validate();
  ds.validate();
  std::size_t n = ds.rows.size();
  std::size_t d = ds.n_features();
  if (n == 0) throw ValidationError("cannot train logistic regression on an empty dataset");

  TrainedLogistic m;
  m.feature_names = ds.feature_names;
  m.feature_indices = ds.feature_indices;
  m.store_schema_id = ds.schema_id;
  m.means.assign(d, 0.0);
  m.scales.assign(d, 1.0);
  m.weights.assign(d, 0.0);

  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += ds.rows[i][j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double dv = ds.rows[i][j] - mean;
      var += dv * dv;
    }
    var /= static_cast<double>(n);
    m.means[j] = mean;
    m.scales[j] = var > 0.0 ? std::sqrt(var) : 1.0;
  }

  std::vector<std::vector<double>> x(n, std::vector<double>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      x[i][j] = (ds.rows[i][j] - m.means[j]) / m.scales[j];
    }
  }

  std::vector<double> grad(d);
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double z = m.bias;
      for (std::size_t j = 0; j < d; ++j) z += m.weights[j] * x[i][j];
      if (z > 40.0) z = 40.0;
      if (z < -40.0) z = -40.0;
      double p = 1.0 / (1.0 + std::exp(-z));
      double y = static_cast<double>(ds.labels[i]);
      double eps = 1e-12;
      loss -= y * std::log(p + eps) + (1.0 - y) * std::log(1.0 - p + eps);
      double err = p - y;
      for (std::size_t j = 0; j < d; ++j) grad[j] += err * x[i][j];
      grad_b += err;
    }
    loss /= static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) {
      loss += 0.5 * params.l2 * m.weights[j] * m.weights[j];
    }
    if (!std::isfinite(loss)) {
      throw DivergenceError("logistic training diverged (non-finite loss); lower learning_rate");
    }
    for (std::size_t j = 0; j < d; ++j) {
      m.weights[j] -= params.learning_rate *
                      (grad[j] / static_cast<double>(n) + params.l2 * m.weights[j]);
    }
    m.bias -= params.learning_rate * grad_b / static_cast<double>(n);
  }
  for (double w : m.weights) {
    if (!std::isfinite(w)) {
      throw DivergenceError("logistic training diverged (non-finite weight); lower learning_rate");
    }
  }
  return m;
}

}  // namespace smartroute
