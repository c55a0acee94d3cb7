#pragma once

#include "selfex/random.hpp"

#include <string>
#include <variant>

namespace selfex {

/// Gamma with inverse scale u and shape v: density u^v x^{v-1} e^{-ux} / Gamma(v).
struct GammaJumps {
  double rate_u;
  double shape_v;
  bool operator==(const GammaJumps&) const = default;
};

struct InverseGaussianJumps {
  double mean;
  double shape;
  bool operator==(const InverseGaussianJumps&) const = default;
};

struct ConstantJumps {
  double value;
  bool operator==(const ConstantJumps&) const = default;
};

using BaseJumpFamily = std::variant<GammaJumps, InverseGaussianJumps, ConstantJumps>;

/// Jump = max(0, base draw + coupling * lambda_pre). The only family whose law
/// depends on the pre-jump intensity.
struct IntensityShiftedJumps {
  BaseJumpFamily base;
  double coupling;
  bool operator==(const IntensityShiftedJumps&) const = default;
};

using JumpFamily = std::variant<GammaJumps, InverseGaussianJumps, ConstantJumps, IntensityShiftedJumps>;

/// Throws Error{JumpMomentUndefined} unless every moment of order <= 4 exists.
void validate_jumps(const JumpFamily& family);

bool depends_on_intensity(const JumpFamily& family) noexcept;

/// Exact raw moment E[X^j] (j >= 1) under nu(lambda_pre, .). lambda_pre is
/// ignored by the intensity-independent families.
double moment(const JumpFamily& family, int j, double lambda_pre = 0.0);

/// One draw from nu(lambda_pre, .).
double sample(const JumpFamily& family, RandomStream& rng, double lambda_pre = 0.0);

/// Lower end of the support of nu(lambda_pre, .).
double support_min(const JumpFamily& family, double lambda_pre) noexcept;

std::string describe(const JumpFamily& family);

// Standalone samplers (exposed for tests and the CIR oracle).
double sample_gamma(RandomStream& rng, double shape, double scale);
double sample_inverse_gaussian(RandomStream& rng, double mean, double shape);

}  // namespace selfex
