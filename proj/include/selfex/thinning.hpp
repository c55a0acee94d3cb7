#pragma once

#include "selfex/core_model.hpp"
#include "selfex/random.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace selfex {

struct SimConfig {
  double horizon = 1.0;
  double grid_dt = 1.0;
  /// Explosion budget: more accepted jumps than this before the horizon is an error.
  std::size_t max_jumps = 1'000'000;
  /// Length of the window after which the dominating bound is recomputed.
  double bound_refresh = 1.0;

  /// bound_refresh = 1 / max(alpha, 1e-6), max_jumps = 1e6.
  static SimConfig defaults_for(const ValidatedModel& model, double horizon, double grid_dt);

  /// Throws Error{InvalidSimConfig}.
  void validate() const;

  /// 0, grid_dt, 2 grid_dt, ... and always the horizon as the last entry.
  std::vector<double> grid_times() const;
};

struct GridRow {
  double t;
  double lambda;
  std::size_t count;  // N(t)
  double jumps_sum;   // U(t)
  double compensator; // Lambda(t)
};

/// One realization of (lambda, N, U, Lambda) on [0, horizon].
struct Path {
  std::vector<double> jump_times;
  std::vector<double> marks;
  std::vector<double> lambda_pre;
  std::vector<double> lambda_post;
  std::vector<GridRow> grid;
  double horizon = 0.0;
  std::uint64_t seed_tag = 0;
  std::uint64_t stream_index = 0;
};

/// sup of the drift-only flow started at lambda_now over any window. The flow
/// is monotone toward lambda0, so this is max(lambda_now, lambda0).
double dominating_bound(const ValidatedModel& model, double lambda_now, double window);

/// Exact simulation by Ogata thinning against the piecewise-constant bound.
/// Throws Error{ExplosionBudgetExceeded} past cfg.max_jumps events.
Path simulate_path(const ValidatedModel& model, const SimConfig& cfg, RandomStream& rng);

}  // namespace selfex
