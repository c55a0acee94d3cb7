#pragma once

#include "selfex/distributions.hpp"

#include <optional>
#include <string>
#include <variant>

namespace selfex {

/// mu(lambda) = alpha (lambda0 - lambda)
struct LinearDrift {
  double alpha;
  double lambda0;
  bool operator==(const LinearDrift&) const = default;
};

/// mu(lambda) = (alpha + delta exp(-gamma lambda^2)) (lambda0 - lambda)
struct NonlinearDrift {
  double alpha;
  double delta;
  double gamma;
  double lambda0;
  bool operator==(const NonlinearDrift&) const = default;
};

using DriftSpec = std::variant<LinearDrift, NonlinearDrift>;

double evaluate(const DriftSpec& drift, double lambda);
double equilibrium(const DriftSpec& drift) noexcept;

/// Lipschitz constant of the drift on [0, inf).
///
/// Linear: alpha. Nonlinear: the derivative is
///   -(alpha + delta e^{-g l^2}) - 2 g delta l (lambda0 - l) e^{-g l^2},
/// and with sup 2 g l^2 e^{-g l^2} = 2/e and sup 2 g l e^{-g l^2} = sqrt(2g/e)
/// this gives alpha + delta (1 + 2/e + lambda0 sqrt(2 gamma / e)).
double lipschitz_constant(const DriftSpec& drift);

/// Full description of one self-exciting model.
struct ModelSpec {
  DriftSpec drift;
  double beta;
  JumpFamily jumps;
  double lambda_init;
  bool operator==(const ModelSpec&) const = default;
};

struct ValidationOptions {
  /// Enforce that nu(lambda, .) is supported on [lambda0 - lambda, inf).
  bool strict_support = false;
};

/// A ModelSpec that passed validate_model. Immutable.
class ValidatedModel {
 public:
  const ModelSpec& spec() const noexcept { return spec_; }
  const DriftSpec& drift() const noexcept { return spec_.drift; }
  const JumpFamily& jumps() const noexcept { return spec_.jumps; }
  double beta() const noexcept { return spec_.beta; }
  double lambda_init() const noexcept { return spec_.lambda_init; }
  double lambda0() const noexcept { return equilibrium(spec_.drift); }

 private:
  friend ValidatedModel validate_model(const ModelSpec&, ValidationOptions);
  explicit ValidatedModel(ModelSpec spec) : spec_(std::move(spec)) {}
  ModelSpec spec_;
};

ValidatedModel validate_model(const ModelSpec& spec, ValidationOptions options = {});

enum class RegimeClass { Supercritical, Critical, Subcritical };

std::string to_string(RegimeClass cls);

struct Regime {
  double rho;
  RegimeClass cls;
  /// -alpha lambda0 / rho; present iff Subcritical.
  std::optional<double> mean_limit;
};

/// rho = beta E[X] - alpha for a linear drift with intensity-independent jumps.
Regime classify_regime(const ModelSpec& spec);

/// True when |rho| <= 1e-12 max(1, beta E[X], alpha).
bool is_critical(double rho, double beta_ex, double alpha) noexcept;

struct FlowState {
  double lambda;
  /// Integral of the intensity over the flowed interval.
  double integral;
};

/// Deterministic drift-only flow over dt, together with its time integral.
/// Linear drift is exact; nonlinear drift uses fixed-step RK4 with
/// h = min(dt, 1e-2 / (alpha + delta)).
FlowState flow_with_integral(const DriftSpec& drift, double lambda_start, double dt);

/// Intensity after flowing lambda_start for dt with no jumps.
double interjump_flow(const DriftSpec& drift, double lambda_start, double dt);
inline double interjump_flow(const ModelSpec& spec, double lambda_start, double dt) {
  return interjump_flow(spec.drift, lambda_start, dt);
}

}  // namespace selfex
