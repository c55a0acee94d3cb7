#include "selfex/core_model.hpp"

#include "selfex/error.hpp"
#include "selfex/numerics/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace selfex {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

void validate_drift(const DriftSpec& drift) {
  std::visit(overloaded{
                 [](const LinearDrift& d) {
                   if (!finite_nonneg(d.alpha))
                     throw Error(Errc::InvalidParameter, "drift alpha must be >= 0");
                   if (!(std::isfinite(d.lambda0) && d.lambda0 > 0.0))
                     throw Error(Errc::InvalidParameter, "drift lambda0 must be > 0");
                 },
                 [](const NonlinearDrift& d) {
                   if (!finite_nonneg(d.alpha) || !finite_nonneg(d.delta) || !finite_nonneg(d.gamma))
                     throw Error(Errc::InvalidParameter, "drift alpha, delta, gamma must be >= 0");
                   if (!(std::isfinite(d.lambda0) && d.lambda0 > 0.0))
                     throw Error(Errc::InvalidParameter, "drift lambda0 must be > 0");
                 },
             },
             drift);
}

double rk4_rate(const NonlinearDrift& d, double lambda) {
  return (d.alpha + d.delta * std::exp(-d.gamma * lambda * lambda)) * (d.lambda0 - lambda);
}

}  // namespace

double evaluate(const DriftSpec& drift, double lambda) {
  return std::visit(overloaded{
                        [&](const LinearDrift& d) { return d.alpha * (d.lambda0 - lambda); },
                        [&](const NonlinearDrift& d) { return rk4_rate(d, lambda); },
                    },
                    drift);
}

double equilibrium(const DriftSpec& drift) noexcept {
  return std::visit([](const auto& d) { return d.lambda0; }, drift);
}

double lipschitz_constant(const DriftSpec& drift) {
  return std::visit(overloaded{
                        [](const LinearDrift& d) { return d.alpha; },
                        [](const NonlinearDrift& d) {
                          const double e = std::numbers::e;
                          return d.alpha + d.delta * (1.0 + 2.0 / e + d.lambda0 * std::sqrt(2.0 * d.gamma / e));
                        },
                    },
                    drift);
}

ValidatedModel validate_model(const ModelSpec& spec, ValidationOptions options) {
  validate_drift(spec.drift);
  if (!std::isfinite(spec.beta) || spec.beta < 0.0)
    throw Error(Errc::NegativeBeta, "beta must be >= 0");
  if (!std::isfinite(spec.lambda_init) || spec.lambda_init <= 0.0)
    throw Error(Errc::NonPositiveInitialIntensity, "lambda_init must be > 0");
  validate_jumps(spec.jumps);
  for (int j = 1; j <= 4; ++j) {
    const double m = moment(spec.jumps, j, spec.lambda_init);
    if (!std::isfinite(m)) throw Error(Errc::JumpMomentUndefined, "jump moment of order <= 4 is not finite");
  }
  if (options.strict_support) {
    const double lambda0 = equilibrium(spec.drift);
    const double lowest = std::min(spec.lambda_init, lambda0);
    if (support_min(spec.jumps, lowest) < lambda0 - lowest)
      throw Error(Errc::SupportViolation, "jump support starts below lambda0 - lambda at lambda = " +
                                              std::to_string(lowest));
  }
  return ValidatedModel(spec);
}

std::string to_string(RegimeClass cls) {
  switch (cls) {
    case RegimeClass::Supercritical: return "supercritical";
    case RegimeClass::Critical: return "critical";
    case RegimeClass::Subcritical: return "subcritical";
  }
  return "unknown";
}

bool is_critical(double rho, double beta_ex, double alpha) noexcept {
  return std::abs(rho) <= 1e-12 * std::max({1.0, std::abs(beta_ex), std::abs(alpha)});
}

Regime classify_regime(const ModelSpec& spec) {
  const auto* linear = std::get_if<LinearDrift>(&spec.drift);
  if (linear == nullptr) throw Error(Errc::NotLinearDrift, "regime classification needs a linear drift");
  if (depends_on_intensity(spec.jumps))
    throw Error(Errc::IntensityDependentJumps, "regime classification needs intensity-independent jumps");
  const double beta_ex = spec.beta * moment(spec.jumps, 1);
  const double rho = beta_ex - linear->alpha;
  if (is_critical(rho, beta_ex, linear->alpha)) return {rho, RegimeClass::Critical, std::nullopt};
  if (rho > 0.0) return {rho, RegimeClass::Supercritical, std::nullopt};
  return {rho, RegimeClass::Subcritical, -linear->alpha * linear->lambda0 / rho};
}

FlowState flow_with_integral(const DriftSpec& drift, double lambda_start, double dt) {
  if (!(dt >= 0.0)) throw Error(Errc::NegativeDuration, "flow duration must be >= 0");
  if (dt == 0.0) return {lambda_start, 0.0};
  return std::visit(
      overloaded{
          [&](const LinearDrift& d) -> FlowState {
            const double gap = lambda_start - d.lambda0;
            const double lambda = d.lambda0 + gap * std::exp(-d.alpha * dt);
            const double integral = d.lambda0 * dt + gap * numerics::decay_integral(d.alpha, dt);
            return {lambda, integral};
          },
          [&](const NonlinearDrift& d) -> FlowState {
            const double rate = d.alpha + d.delta;
            if (rate == 0.0) return {lambda_start, lambda_start * dt};
            const double h_max = std::min(dt, 1e-2 / rate);
            const auto steps = static_cast<long>(std::ceil(dt / h_max - 1e-9));
            const double h = dt / static_cast<double>(std::max(1L, steps));
            // RK4 on (lambda, integral); the integral's rate is lambda itself.
            double lambda = lambda_start, integral = 0.0;
            for (long i = 0; i < std::max(1L, steps); ++i) {
              const double k1 = rk4_rate(d, lambda);
              const double l2 = lambda + 0.5 * h * k1;
              const double k2 = rk4_rate(d, l2);
              const double l3 = lambda + 0.5 * h * k2;
              const double k3 = rk4_rate(d, l3);
              const double l4 = lambda + h * k3;
              const double k4 = rk4_rate(d, l4);
              integral += h / 6.0 * (lambda + 2.0 * l2 + 2.0 * l3 + l4);
              lambda += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            return {lambda, integral};
          },
      },
      drift);
}

double interjump_flow(const DriftSpec& drift, double lambda_start, double dt) {
  return flow_with_integral(drift, lambda_start, dt).lambda;
}

}  // namespace selfex
