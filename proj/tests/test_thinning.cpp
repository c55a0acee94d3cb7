#include <doctest.h>

#include "oracles.hpp"
#include "selfex/ensemble.hpp"
#include "selfex/error.hpp"
#include "selfex/linear_moments.hpp"
#include "selfex/stats.hpp"
#include "selfex/thinning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

using namespace selfex;

namespace {

const ModelSpec kPoisson{LinearDrift{1.0, 2.0}, 0.0, ConstantJumps{1.0}, 2.0};
const ModelSpec kLinear1{LinearDrift{0.1233, 0.05}, 0.0399, InverseGaussianJumps{1.9389, 5.4943}, 0.05};
const ModelSpec kNonlinear1{NonlinearDrift{0.1233, 0.5, 50.0, 0.05}, 0.0399, InverseGaussianJumps{1.9389, 5.4943},
                            0.05};

SimConfig config(const ValidatedModel& m, double horizon, double dt) { return SimConfig::defaults_for(m, horizon, dt); }

void check_path_invariants(const Path& p, double beta) {
  REQUIRE(p.jump_times.size() == p.marks.size());
  REQUIRE(p.lambda_pre.size() == p.marks.size());
  REQUIRE(p.lambda_post.size() == p.marks.size());
  for (std::size_t k = 0; k < p.jump_times.size(); ++k) {
    CHECK(p.jump_times[k] >= 0.0);
    CHECK(p.jump_times[k] <= p.horizon);
    if (k) CHECK(p.jump_times[k] > p.jump_times[k - 1]);
    CHECK(p.lambda_post[k] == p.lambda_pre[k] + beta * p.marks[k]);
  }
  REQUIRE(!p.grid.empty());
  CHECK(p.grid.front().t == 0.0);
  CHECK(p.grid.front().compensator == 0.0);
  CHECK(p.grid.back().t == p.horizon);
  for (std::size_t r = 0; r < p.grid.size(); ++r) {
    const auto& g = p.grid[r];
    std::size_t n = 0;
    double u = 0.0;
    for (std::size_t k = 0; k < p.jump_times.size(); ++k)
      if (p.jump_times[k] <= g.t) {
        ++n;
        u += p.marks[k];
      }
    CHECK(g.count == n);
    CHECK(g.jumps_sum == doctest::Approx(u).epsilon(1e-12));
    if (r) CHECK(g.compensator >= p.grid[r - 1].compensator);
  }
  CHECK(p.grid.back().count == p.jump_times.size());
}

}  // namespace

TEST_CASE("dominating bound examples") {
  const ValidatedModel m = validate_model(kLinear1);
  CHECK(dominating_bound(m, 0.05, 1.0) == 0.05);
  CHECK(dominating_bound(m, 0.15, 1.0) == 0.15);
  CHECK(dominating_bound(m, 0.025, 1.0) == 0.05);
}

TEST_CASE("grid times always end at the horizon") {
  SimConfig cfg;
  cfg.horizon = 1.0;
  cfg.grid_dt = 0.3;
  const auto t = cfg.grid_times();
  CHECK(t.front() == 0.0);
  CHECK(t.back() == 1.0);
  CHECK(t.size() == 5);
  SimConfig bad;
  bad.grid_dt = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = SimConfig{};
  bad.max_jumps = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("path invariants hold for linear, nonlinear and intensity-shifted models") {
  const std::vector<ModelSpec> specs{
      kLinear1, kNonlinear1, kPoisson,
      ModelSpec{LinearDrift{1.0, 1.0}, 0.6, IntensityShiftedJumps{GammaJumps{2.0, 1.0}, -0.2}, 1.5}};
  for (const auto& spec : specs) {
    const ValidatedModel m = validate_model(spec);
    const SimConfig cfg = config(m, 60.0, 0.7);
    for (std::uint64_t i = 0; i < 20; ++i) {
      RandomStream rng(8, i);
      const Path p = simulate_path(m, cfg, rng);
      check_path_invariants(p, spec.beta);
      CHECK(p.stream_index == i);
    }
  }
}

TEST_CASE("Example 1 nonlinear paths never drop below min(lambda_init, lambda0)") {
  const ValidatedModel m = validate_model(kNonlinear1);
  const SimConfig cfg = config(m, 200.0, 0.5);
  for (std::uint64_t i = 0; i < 50; ++i) {
    RandomStream rng(12, i);
    const Path p = simulate_path(m, cfg, rng);
    for (const auto& g : p.grid) CHECK(g.lambda >= 0.05);
    // U is flat between consecutive jumps
    for (std::size_t r = 1; r < p.grid.size(); ++r) {
      const bool jumped = std::any_of(p.jump_times.begin(), p.jump_times.end(), [&](double tk) {
        return tk > p.grid[r - 1].t && tk <= p.grid[r].t;
      });
      if (!jumped) CHECK(p.grid[r].jumps_sum == p.grid[r - 1].jumps_sum);
    }
  }
}

TEST_CASE("Poisson reduction: N(3) has mean and variance 6") {
  const ValidatedModel m = validate_model(kPoisson);
  const SimConfig cfg = config(m, 3.0, 3.0);
  const auto counts = map_paths(m, cfg, 20000, 4, [](const Path& p, std::size_t) { return static_cast<double>(p.grid.back().count); });
  const auto mean = stats::mean_estimate(counts);
  const auto var = stats::variance_estimate(counts);
  CHECK(std::abs(mean.value - 6.0) <= 3 * mean.se);
  CHECK(std::abs(var.value - 6.0) <= 3 * var.se);
}

TEST_CASE("linear Example 1 mean of lambda(10) matches the closed form") {
  const ValidatedModel m = validate_model(kLinear1);
  const SimConfig cfg = config(m, 10.0, 10.0);
  const auto s = simulate_ensemble(m, cfg, 20000, 21);
  const double exact = mean_intensity(LinearMomentParams::from_model(kLinear1), 10.0);
  CHECK(std::abs(s.mean_lambda.back() - exact) <= 3 * s.se_lambda.back());
}

TEST_CASE("ensemble of one reproduces simulate_path on stream (seed, 0)") {
  const ValidatedModel m = validate_model(kLinear1);
  const SimConfig cfg = config(m, 30.0, 1.0);
  std::vector<Path> kept;
  const auto s = simulate_ensemble(m, cfg, 1, 99, 1, &kept);
  RandomStream rng(99, 0);
  const Path p = simulate_path(m, cfg, rng);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].jump_times == p.jump_times);
  CHECK(kept[0].marks == p.marks);
  for (std::size_t r = 0; r < p.grid.size(); ++r) CHECK(s.mean_lambda[r] == p.grid[r].lambda);
}

TEST_CASE("ensemble summaries are bit-identical for any worker count") {
  const ValidatedModel m = validate_model(kLinear1);
  const SimConfig cfg = config(m, 20.0, 2.0);
  const auto a = to_json(simulate_ensemble(m, cfg, 3000, 5, 1)).dump();
  const auto b = to_json(simulate_ensemble(m, cfg, 3000, 5, 3)).dump();
  const auto c = to_json(simulate_ensemble(m, cfg, 3000, 5, 8)).dump();
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("compensated counting process has mean zero") {
  for (const auto& spec : {kLinear1, kNonlinear1}) {
    const ValidatedModel m = validate_model(spec);
    const SimConfig cfg = config(m, 40.0, 40.0);
    const auto gaps = map_paths(m, cfg, 20000, 17, [](const Path& p, std::size_t) {
      return static_cast<double>(p.grid.back().count) - p.grid.back().compensator;
    });
    CHECK(std::abs(oracle::mean(gaps)) <= 3 * oracle::se(gaps));
  }
}

TEST_CASE("subcritical ensemble mean settles at -alpha lambda0 / rho") {
  const ModelSpec spec{LinearDrift{1.0, 1.0}, 0.5, GammaJumps{1.0, 1.0}, 3.0};  // rho = -0.5
  const ValidatedModel m = validate_model(spec);
  const double t = std::log(1e3) / 0.5 + 1.0;
  const auto s = simulate_ensemble(m, config(m, t, t), 20000, 23);
  CHECK(std::abs(s.mean_lambda.back() - 2.0) <= 3 * s.se_lambda.back());
}

TEST_CASE("bound_refresh does not change the jump-count law") {
  const ValidatedModel m = validate_model(kLinear1);
  SimConfig fine = config(m, 50.0, 50.0), coarse = fine;
  fine.bound_refresh = 0.5;
  coarse.bound_refresh = 40.0;
  auto count = [](const Path& p, std::size_t) { return static_cast<double>(p.grid.back().count); };
  auto a = map_paths(m, fine, 20000, 1, count);
  auto b = map_paths(m, coarse, 20000, 2, count);
  // two-sample KS on integer counts
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0;
  for (double k = 0; k <= std::max(a.back(), b.back()); k += 1) {
    const double fa = static_cast<double>(std::upper_bound(a.begin(), a.end(), k) - a.begin()) / a.size();
    const double fb = static_cast<double>(std::upper_bound(b.begin(), b.end(), k) - b.begin()) / b.size();
    d = std::max(d, std::abs(fa - fb));
  }
  // 1% critical value 1.63 sqrt(2/n)
  CHECK(d < 1.63 * std::sqrt(2.0 / 20000));
}

TEST_CASE("explosion budget reports the offending path") {
  const ModelSpec hot{LinearDrift{0.1, 1.0}, 2.0, ConstantJumps{1.0}, 1.0};
  const ValidatedModel m = validate_model(hot);
  SimConfig cfg = config(m, 50.0, 50.0);
  cfg.max_jumps = 50;
  try {
    simulate_ensemble(m, cfg, 10, 3, 2);
    FAIL("expected ExplosionBudgetExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ExplosionBudgetExceeded);
    REQUIRE(e.path_index());
    CHECK(*e.path_index() == 0);
  }
}
