#include <doctest.h>

#include "oracles.hpp"
#include "selfex/core_model.hpp"
#include "selfex/error.hpp"
#include "selfex/random.hpp"

#include <cmath>

using namespace selfex;

namespace {

const ModelSpec kExample1Linear{LinearDrift{0.1233, 0.05}, 0.0399, InverseGaussianJumps{1.9389, 5.4943}, 0.05};

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::InvalidParameter;
}

}  // namespace

TEST_CASE("drift evaluation") {
  const DriftSpec lin = LinearDrift{0.5, 2.0};
  CHECK(evaluate(lin, 1.0) == 0.5);
  const DriftSpec nl = NonlinearDrift{0.5, 1.0, 2.0, 2.0};
  CHECK(evaluate(nl, 1.0) == doctest::Approx((0.5 + std::exp(-2.0)) * 1.0));
  CHECK(equilibrium(nl) == 2.0);
}

TEST_CASE("Lipschitz constants bound the drift slope") {
  const DriftSpec nl = NonlinearDrift{0.1, 0.8, 3.0, 0.7};
  const double L = lipschitz_constant(nl);
  double worst = 0;
  for (double x = 0; x < 5; x += 1e-3) {
    const double slope = std::abs(evaluate(nl, x + 1e-6) - evaluate(nl, x)) / 1e-6;
    worst = std::max(worst, slope);
  }
  CHECK(worst <= L);
  CHECK(lipschitz_constant(LinearDrift{0.3, 1.0}) == 0.3);
}

TEST_CASE("validate_model examples") {
  CHECK_NOTHROW(validate_model(kExample1Linear));
  ModelSpec zero_init = kExample1Linear;
  zero_init.lambda_init = 0.0;
  CHECK(code_of([&] { validate_model(zero_init); }) == Errc::NonPositiveInitialIntensity);
  ModelSpec bad_gamma = kExample1Linear;
  bad_gamma.jumps = GammaJumps{1.0, -1.0};
  CHECK(code_of([&] { validate_model(bad_gamma); }) == Errc::JumpMomentUndefined);
  ModelSpec neg_beta = kExample1Linear;
  neg_beta.beta = -0.1;
  CHECK(code_of([&] { validate_model(neg_beta); }) == Errc::NegativeBeta);
}

TEST_CASE("strict support mode") {
  ModelSpec below = kExample1Linear;
  below.lambda_init = 0.025;
  CHECK_NOTHROW(validate_model(below));
  CHECK(code_of([&] { validate_model(below, {true}); }) == Errc::SupportViolation);
  CHECK_NOTHROW(validate_model(kExample1Linear, {true}));
}

TEST_CASE("validate_model is idempotent") {
  const ValidatedModel once = validate_model(kExample1Linear);
  const ValidatedModel twice = validate_model(once.spec());
  CHECK(once.spec() == twice.spec());
  CHECK(twice.spec() == kExample1Linear);
}

TEST_CASE("regime classification examples") {
  const Regime r = classify_regime(kExample1Linear);
  CHECK(r.rho == doctest::Approx(0.0399 * 1.9389 - 0.1233).epsilon(1e-15));
  CHECK(r.rho == doctest::Approx(-0.045938).epsilon(1e-4));
  CHECK(r.cls == RegimeClass::Subcritical);
  REQUIRE(r.mean_limit);
  CHECK(*r.mean_limit == doctest::Approx(0.13420).epsilon(1e-4));

  // long-horizon RK4 of m' = alpha lambda0 + rho m
  const auto m = oracle::rk4([&](double, const oracle::State& s) { return oracle::State{0.1233 * 0.05 + r.rho * s[0]}; },
                             {0.05}, 0.0, 600.0, 60000);
  CHECK(m[0] == doctest::Approx(*r.mean_limit).epsilon(1e-9));

  ModelSpec no_jumps = kExample1Linear;
  no_jumps.beta = 0.0;
  const Regime r0 = classify_regime(no_jumps);
  CHECK(r0.rho == -0.1233);
  CHECK(*r0.mean_limit == doctest::Approx(0.05).epsilon(1e-15));

  const ModelSpec balanced{LinearDrift{0.5, 1.0}, 0.25, ConstantJumps{2.0}, 1.0};
  const Regime rc = classify_regime(balanced);
  CHECK(rc.cls == RegimeClass::Critical);
  CHECK_FALSE(rc.mean_limit);

  const ModelSpec hot{LinearDrift{0.5, 1.0}, 1.0, ConstantJumps{2.0}, 1.0};
  CHECK(classify_regime(hot).cls == RegimeClass::Supercritical);

  const ModelSpec nonlinear{NonlinearDrift{0.1, 0.1, 1.0, 1.0}, 0.1, ConstantJumps{1.0}, 1.0};
  CHECK(code_of([&] { classify_regime(nonlinear); }) == Errc::NotLinearDrift);
  const ModelSpec shifted{LinearDrift{0.5, 1.0}, 0.1, IntensityShiftedJumps{ConstantJumps{1.0}, 0.1}, 1.0};
  CHECK(code_of([&] { classify_regime(shifted); }) == Errc::IntensityDependentJumps);
}

TEST_CASE("regime is invariant under (beta, E[X]) -> (c beta, E[X]/c)") {
  for (const double c : {0.1, 0.5, 3.0, 17.0}) {
    const ModelSpec a{LinearDrift{0.3, 1.0}, 0.2, GammaJumps{1.0, 1.2}, 1.0};
    const ModelSpec b{LinearDrift{0.3, 1.0}, 0.2 * c, GammaJumps{c, 1.2}, 1.0};
    const Regime ra = classify_regime(a), rb = classify_regime(b);
    CHECK(ra.cls == rb.cls);
    CHECK(rb.rho == doctest::Approx(ra.rho).epsilon(1e-13));
  }
}

TEST_CASE("linear flow examples") {
  const DriftSpec eq = LinearDrift{0.7, 1.3};
  for (const double dt : {0.0, 0.1, 5.0, 100.0}) CHECK(interjump_flow(eq, 1.3, dt) == 1.3);
  // lambda0 = 0 is outside the validated range, but the flow formula itself covers it.
  CHECK(interjump_flow(DriftSpec{LinearDrift{1.0, 0.0}}, 1.0, std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(code_of([&] { interjump_flow(eq, 1.0, -1.0); }) == Errc::NegativeDuration);
}

TEST_CASE("nonlinear flow with delta = 0 reproduces the linear closed form") {
  RandomStream rng(31, 0);
  const DriftSpec lin = LinearDrift{0.4, 1.5};
  const DriftSpec nl = NonlinearDrift{0.4, 0.0, 2.0, 1.5};
  for (int i = 0; i < 100; ++i) {
    const double start = 5.0 * rng.uniform();
    const double dt = 10.0 * rng.uniform();
    CHECK(oracle::rel(interjump_flow(nl, start, dt), interjump_flow(lin, start, dt)) <= 1e-10);
    const FlowState a = flow_with_integral(nl, start, dt), b = flow_with_integral(lin, start, dt);
    CHECK(oracle::rel(a.integral, b.integral) <= 1e-9);
  }
}

TEST_CASE("flow integral matches quadrature of the flow") {
  const DriftSpec nl = NonlinearDrift{0.1233, 0.5, 50.0, 0.05};
  const double start = 0.4, dt = 7.0;
  const double ref = oracle::simpson([&](double s) { return interjump_flow(nl, start, s); }, 0.0, dt, 2000);
  CHECK(flow_with_integral(nl, start, dt).integral == doctest::Approx(ref).epsilon(1e-8));
}

TEST_CASE("flows are monotone toward lambda0 and satisfy the semigroup property") {
  const std::vector<DriftSpec> drifts{LinearDrift{0.3, 1.0}, NonlinearDrift{0.1233, 0.5, 50.0, 0.05},
                                      NonlinearDrift{0.2, 2.0, 0.5, 1.0}};
  for (const auto& d : drifts) {
    const double l0 = equilibrium(d);
    for (const double start : {0.0, 0.5 * l0, 3.0 * l0, 10.0}) {
      double prev = start;
      for (double t = 0.25; t <= 20; t += 0.25) {
        const double x = interjump_flow(d, start, t);
        if (start > l0) {
          CHECK(x <= prev + 1e-15);
          CHECK(x >= l0 - 1e-15);
        } else {
          CHECK(x >= prev - 1e-15);
          CHECK(x <= l0 + 1e-15);
        }
        prev = x;
      }
      const double s = 1.3, t = 2.9;
      const double split = interjump_flow(d, interjump_flow(d, start, s), t);
      const double whole = interjump_flow(d, start, s + t);
      CHECK(std::abs(split - whole) <= 1e-9 * std::max(1.0, std::abs(whole)));
    }
  }
}
