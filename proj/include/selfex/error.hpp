#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace selfex {

enum class Errc {
  InvalidParameter,
  NonPositiveInitialIntensity,
  NegativeBeta,
  JumpMomentUndefined,
  SupportViolation,
  NotLinearDrift,
  IntensityDependentJumps,
  NegativeDuration,
  InvalidSimConfig,
  ExplosionBudgetExceeded,
  BoundViolated,
  NegativeVarianceBeyondTolerance,
  RhoZeroClosedForm,
  OrderTooHigh,
  InconsistentWithMomentODE,
  EmptySample,
  DegenerateBins,
  InfeasibleRhoTarget,
  InvalidConfig,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure surfaced by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, std::optional<std::size_t> path_index = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        path_index_(path_index) {}

  Errc code() const noexcept { return code_; }
  /// Set for simulation failures raised inside an ensemble.
  std::optional<std::size_t> path_index() const noexcept { return path_index_; }

 private:
  Errc code_;
  std::optional<std::size_t> path_index_;
};

}  // namespace selfex
