#include <doctest.h>

#include "oracles.hpp"
#include "selfex/cir.hpp"
#include "selfex/error.hpp"
#include "selfex/stats.hpp"

#include <cmath>
#include <vector>

using namespace selfex;

namespace {

const CirParams kRef{1.0, 1.0, 0.25, 0.0};

double closed_mean(const CirParams& p, double t) {
  return p.c0 / p.c1 * (1 - std::exp(-p.c1 * t)) + p.y0 * std::exp(-p.c1 * t);
}

}  // namespace

TEST_CASE("CIR moment examples") {
  const CirParams p{1.0, 1.0, 1.0, 0.0};
  CHECK(cir_mean(p, 0.0) == 0.0);
  CHECK(cir_mean(p, 1.0) == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-14));
  const auto y = cir_moments(p, 3, 1.0);
  CHECK(y[0] == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-9));
  // Gamma(2, (1 - e^{-1})/2): second moment shape (shape + 1) scale^2
  const double s = (1 - std::exp(-1.0)) / 2;
  CHECK(y[1] == doctest::Approx(6 * s * s).epsilon(1e-9));
  CHECK(y[2] == doctest::Approx(24 * s * s * s).epsilon(1e-9));
}

TEST_CASE("moments are ordered and the closed-form mean agrees with the ODE") {
  for (const CirParams& p : {kRef, CirParams{0.3, 2.0, 1.5, 0.7}, CirParams{2.0, 0.5, 0.1, 3.0}}) {
    for (double t : {0.1, 1.0, 5.0}) {
      const auto y = cir_moments(p, 4, t);
      CHECK(oracle::rel(y[0], closed_mean(p, t)) <= 1e-9);
      CHECK(oracle::rel(cir_mean(p, t), closed_mean(p, t)) <= 1e-14);
      CHECK(y[1] >= y[0] * y[0]);
      CHECK(y[3] >= y[1] * y[1]);
    }
  }
}

TEST_CASE("joint table reproduces the marginal moments and an RK4 oracle") {
  const CirParams p{0.8, 1.3, 0.6, 0.4};
  const double t = 2.0;
  const Eigen::MatrixXd y = cir_joint_moments(p, 2, 2, t);
  REQUIRE(y.rows() == 3);
  REQUIRE(y.cols() == 3);
  CHECK(y(0, 0) == 1.0);
  const auto marg = cir_moments(p, 2, t);
  CHECK(oracle::rel(y(0, 1), marg[0]) <= 1e-9);
  CHECK(oracle::rel(y(0, 2), marg[1]) <= 1e-9);

  // closure m + n <= 4, index (m, n) -> m * 5 + n
  auto idx = [](int m, int n) { return m * 5 + n; };
  oracle::Rhs f = [&](double, const oracle::State& s) {
    oracle::State d(25, 0.0);
    for (int m = 0; m <= 4; ++m)
      for (int n = 0; m + n <= 4; ++n) {
        double v = -n * p.c1 * s[idx(m, n)];
        if (m > 0) v += m * s[idx(m - 1, n + 1)];
        if (n > 0) v += (n * p.c0 + 0.5 * n * (n - 1) * p.c2) * s[idx(m, n - 1)];
        d[idx(m, n)] = v;
      }
    return d;
  };
  oracle::State init(25, 0.0);
  for (int n = 0; n <= 4; ++n) init[idx(0, n)] = std::pow(p.y0, n);
  const auto ref = oracle::rk4(f, init, 0.0, t, 4000);
  for (int m = 0; m <= 2; ++m)
    for (int n = 0; n <= 2; ++n) CHECK(oracle::rel(y(m, n), ref[idx(m, n)]) <= 1e-9);
}

TEST_CASE("d/dt y_{1,0} equals y_{0,1} and y_{1,0} integrates the mean") {
  const CirParams p{0.8, 1.3, 0.6, 0.4};
  const double t = 1.5, h = 1e-4;
  const double d = (cir_joint_moments(p, 1, 0, t + h)(1, 0) - cir_joint_moments(p, 1, 0, t - h)(1, 0)) / (2 * h);
  CHECK(std::abs(d - cir_mean(p, t)) <= 1e-6);
  const double integral = oracle::simpson([&](double s) { return closed_mean(p, s); }, 0.0, t, 2000);
  CHECK(oracle::rel(cir_joint_moments(p, 1, 0, t)(1, 0), integral) <= 1e-8);
}

TEST_CASE("marginal law has the ODE mean and variance") {
  const auto g = cir_marginal(kRef, 1.0);
  const auto y = cir_moments(kRef, 2, 1.0);
  CHECK(oracle::rel(g.mean(), y[0]) <= 1e-8);
  CHECK(oracle::rel(g.variance(), y[1] - y[0] * y[0]) <= 1e-8);
  CHECK(g.shape == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(g.cdf(0.0) == 0.0);
  CHECK(g.cdf(1e6) == doctest::Approx(1.0));
}

TEST_CASE("marginal scale vanishes as t -> 0 and needs y0 = 0") {
  double prev = cir_marginal(kRef, 1.0).scale;
  for (double t : {0.1, 0.01, 1e-4}) {
    const double s = cir_marginal(kRef, t).scale;
    CHECK(s < prev);
    prev = s;
  }
  CHECK(prev < 1e-4);
  CHECK_THROWS_AS(cir_marginal(CirParams{1, 1, 1, 0.5}, 1.0), Error);
  CHECK_THROWS_AS(cir_marginal(kRef, 0.0), Error);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((CirParams{-1, 1, 1, 0}.validate()), Error);
  CHECK_THROWS_AS((CirParams{1, 1, 0, 0}.validate()), Error);
  CHECK_THROWS_AS((CirParams{1, 1, 1, -1}.validate()), Error);
  CHECK_NOTHROW(kRef.validate());
}

TEST_CASE("Euler sampler: nonnegative, deterministic at c2 = 0, reproducible") {
  RandomStream rng(1);
  for (int i = 0; i < 2000; ++i) CHECK(cir_sample_euler(CirParams{0.1, 1.0, 4.0, 0.0}, 1.0, 1e-2, rng) >= 0.0);
  const CirParams det{1.0, 1.0, 0.0, 0.0};
  RandomStream a(2), b(3);
  const auto da = cir_draw_euler(det, 1.0, 1e-3, a);
  const auto db = cir_draw_euler(det, 1.0, 1e-3, b);
  CHECK(da.value == db.value);
  CHECK(da.integral == db.integral);
  CHECK(std::abs(da.value - closed_mean(det, 1.0)) <= 1e-3);
  RandomStream c(4), d(4);
  CHECK(cir_sample_euler(kRef, 1.0, 1e-2, c) == cir_sample_euler(kRef, 1.0, 1e-2, d));
}

TEST_CASE("Euler Monte Carlo agrees with the moment ODE and the gamma marginal") {
  const int n = 100000;
  std::vector<double> y(n), y2(n), i2(n);
  for (int k = 0; k < n; ++k) {
    RandomStream rng(77, k);
    const auto d = cir_draw_euler(kRef, 1.0, 1e-3, rng);
    y[k] = d.value;
    y2[k] = d.value * d.value;
    i2[k] = d.integral * d.integral;
  }
  const auto ode = cir_moments(kRef, 2, 1.0);
  const auto joint = cir_joint_moments(kRef, 2, 0, 1.0);
  CHECK(std::abs(oracle::mean(y) - ode[0]) <= 3 * oracle::se(y));
  CHECK(std::abs(oracle::mean(y2) - ode[1]) <= 3 * oracle::se(y2));
  CHECK(std::abs(oracle::mean(i2) - joint(2, 0)) <= 3 * oracle::se(i2));
  const auto law = cir_marginal(kRef, 1.0);
  CHECK(stats::ks_distance(y, [&](double x) { return law.cdf(x); }) <= 0.01);
}
