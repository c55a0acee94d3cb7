#include "selfex/error.hpp"

namespace selfex {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidParameter: return "InvalidParameter";
    case Errc::NonPositiveInitialIntensity: return "NonPositiveInitialIntensity";
    case Errc::NegativeBeta: return "NegativeBeta";
    case Errc::JumpMomentUndefined: return "JumpMomentUndefined";
    case Errc::SupportViolation: return "SupportViolation";
    case Errc::NotLinearDrift: return "NotLinearDrift";
    case Errc::IntensityDependentJumps: return "IntensityDependentJumps";
    case Errc::NegativeDuration: return "NegativeDuration";
    case Errc::InvalidSimConfig: return "InvalidSimConfig";
    case Errc::ExplosionBudgetExceeded: return "ExplosionBudgetExceeded";
    case Errc::BoundViolated: return "BoundViolated";
    case Errc::NegativeVarianceBeyondTolerance: return "NegativeVarianceBeyondTolerance";
    case Errc::RhoZeroClosedForm: return "RhoZeroClosedForm";
    case Errc::OrderTooHigh: return "OrderTooHigh";
    case Errc::InconsistentWithMomentODE: return "InconsistentWithMomentODE";
    case Errc::EmptySample: return "EmptySample";
    case Errc::DegenerateBins: return "DegenerateBins";
    case Errc::InfeasibleRhoTarget: return "InfeasibleRhoTarget";
    case Errc::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace selfex
