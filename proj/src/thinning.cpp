#include "selfex/thinning.hpp"

#include "selfex/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace selfex {

namespace {

double drift_alpha(const DriftSpec& drift) {
  return std::visit([](const auto& d) { return d.alpha; }, drift);
}

struct State {
  double t = 0.0;
  double lambda = 0.0;
  std::size_t count = 0;
  double jumps_sum = 0.0;
  double compensator = 0.0;
};

class PathBuilder {
 public:
  PathBuilder(const ValidatedModel& model, const SimConfig& cfg, Path& path)
      : drift_(model.drift()), grid_(cfg.grid_times()), path_(path) {
    state_.lambda = model.lambda_init();
    path_.grid.reserve(grid_.size());
    record_due_rows();
  }

  State& state() { return state_; }

  /// Flows without jumps up to `to`, filling any grid rows on the way.
  void advance(double to) {
    while (next_row_ < grid_.size() && grid_[next_row_] <= to) {
      flow_to(grid_[next_row_]);
      record_due_rows();
    }
    flow_to(to);
  }

 private:
  void flow_to(double to) {
    if (to <= state_.t) return;
    const FlowState f = flow_with_integral(drift_, state_.lambda, to - state_.t);
    state_.lambda = f.lambda;
    state_.compensator += f.integral;
    state_.t = to;
  }

  void record_due_rows() {
    while (next_row_ < grid_.size() && grid_[next_row_] <= state_.t) {
      path_.grid.push_back(
          {grid_[next_row_], state_.lambda, state_.count, state_.jumps_sum, state_.compensator});
      ++next_row_;
    }
  }

  const DriftSpec& drift_;
  std::vector<double> grid_;
  Path& path_;
  State state_;
  std::size_t next_row_ = 0;
};

}  // namespace

SimConfig SimConfig::defaults_for(const ValidatedModel& model, double horizon, double grid_dt) {
  SimConfig cfg;
  cfg.horizon = horizon;
  cfg.grid_dt = grid_dt;
  cfg.max_jumps = 1'000'000;
  cfg.bound_refresh = 1.0 / std::max(drift_alpha(model.drift()), 1e-6);
  return cfg;
}

void SimConfig::validate() const {
  if (!(std::isfinite(horizon) && horizon > 0.0))
    throw Error(Errc::InvalidSimConfig, "horizon must be > 0");
  if (!(std::isfinite(grid_dt) && grid_dt > 0.0))
    throw Error(Errc::InvalidSimConfig, "grid_dt must be > 0");
  if (grid_dt > horizon) throw Error(Errc::InvalidSimConfig, "grid_dt must not exceed the horizon");
  if (max_jumps < 1) throw Error(Errc::InvalidSimConfig, "max_jumps must be >= 1");
  if (!(std::isfinite(bound_refresh) && bound_refresh > 0.0))
    throw Error(Errc::InvalidSimConfig, "bound_refresh must be > 0");
}

std::vector<double> SimConfig::grid_times() const {
  std::vector<double> times;
  const auto steps = static_cast<std::size_t>(std::floor(horizon / grid_dt + 1e-9));
  times.reserve(steps + 2);
  for (std::size_t i = 0; i <= steps; ++i) times.push_back(std::min(horizon, static_cast<double>(i) * grid_dt));
  if (times.back() < horizon * (1.0 - 1e-12)) {
    times.push_back(horizon);
  } else {
    times.back() = horizon;
  }
  return times;
}

double dominating_bound(const ValidatedModel& model, double lambda_now, double /*window*/) {
  return std::max(lambda_now, model.lambda0());
}

Path simulate_path(const ValidatedModel& model, const SimConfig& cfg, RandomStream& rng) {
  cfg.validate();
  Path path;
  path.horizon = cfg.horizon;
  path.seed_tag = rng.master_seed();
  path.stream_index = rng.index();

  PathBuilder builder(model, cfg, path);
  State& s = builder.state();
  const double beta = model.beta();

  while (s.t < cfg.horizon) {
    const double bound = dominating_bound(model, s.lambda, cfg.bound_refresh);
    const double window_end = std::min(s.t + cfg.bound_refresh, cfg.horizon);
    const double candidate = s.t + rng.exponential(bound);
    if (candidate >= window_end) {
      // Memoryless proposals: restart from the window end with a fresh bound.
      builder.advance(window_end);
      continue;
    }
    builder.advance(candidate);
    const double lambda_minus = s.lambda;
    if (lambda_minus > bound * (1.0 + 1e-12))
      throw Error(Errc::BoundViolated, "intensity " + std::to_string(lambda_minus) +
                                           " exceeds dominating bound " + std::to_string(bound));
    if (rng.uniform() * bound >= lambda_minus) continue;

    if (s.count >= cfg.max_jumps)
      throw Error(Errc::ExplosionBudgetExceeded,
                  "more than " + std::to_string(cfg.max_jumps) + " jumps before t=" +
                      std::to_string(cfg.horizon),
                  rng.index());
    const double mark = sample(model.jumps(), rng, lambda_minus);
    s.lambda = lambda_minus + beta * mark;
    s.count += 1;
    s.jumps_sum += mark;
    path.jump_times.push_back(s.t);
    path.marks.push_back(mark);
    path.lambda_pre.push_back(lambda_minus);
    path.lambda_post.push_back(s.lambda);
  }
  return path;
}

}  // namespace selfex
