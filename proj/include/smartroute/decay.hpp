#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "smartroute/core.hpp"
#include "smartroute/errors.hpp"

namespace smartroute {

// Half-life decay: value / 2^(dt/hl). dt must be non-negative; callers deal
// with clock regression (DecayedCounter clamps it to zero).
inline double decay_value(double value, double dt_s, double half_life_s) {
  if (half_life_s <= 0.0) throw ConfigError("half-life must be positive");
  if (dt_s < 0.0) throw ValidationError("elapsed time must be non-negative");
  return value * std::exp2(-dt_s / half_life_s);
}

// Success/total pair where both components decay with the same half-life.
// Scaling numerator and denominator together preserves the ratio, so the
// decayed pair is an exponentially recency-weighted success rate.
struct DecayedCounter {
  double successes = 0.0;
  double total = 0.0;
  TimestampMs last_update = 0;
  double half_life_s = 30.0;

  bool empty() const { return total == 0.0; }

  // Decayed (successes, total) as of `ts` without recording anything.
  std::pair<double, double> decayed(TimestampMs ts) const {
    if (total == 0.0) return {0.0, 0.0};
    double dt = std::max(0.0, seconds_between(last_update, ts));
    double f = std::exp2(-dt / half_life_s);
    return {successes * f, total * f};
  }

  // Record one outcome (success=1 / failure=0) at `ts`. Out-of-order
  // feedback is tolerated: dt clamps to zero and the event still counts.
  void update(int outcome, TimestampMs ts) {
    if (half_life_s <= 0.0) throw ConfigError("half-life must be positive");
    auto [s, n] = decayed(ts);
    successes = s + static_cast<double>(outcome);
    total = n + 1.0;
    last_update = std::max(ts, last_update);
  }

  // Smoothed success rate at `ts`: (S* + alpha) / (N* + alpha).
  // A counter that has never seen an event reads 1.0 (optimistic prior:
  // the first payment sees feature values equal to 1).
  double read(TimestampMs ts, double alpha) const {
    if (alpha < 0.0) throw ConfigError("smoothing alpha must be non-negative");
    auto [s, n] = decayed(ts);
    if (n + alpha <= 0.0) return 1.0;
    return (s + alpha) / (n + alpha);
  }
};

}  // namespace smartroute
