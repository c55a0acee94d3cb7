#include "selfex/distributions.hpp"

#include "selfex/error.hpp"
#include "selfex/numerics/quadrature.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cassert>
#include <cmath>
#include <numbers>
#include <sstream>

namespace selfex {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

void validate_base(const BaseJumpFamily& base) {
  std::visit(overloaded{
                 [](const GammaJumps& g) {
                   if (!positive_finite(g.rate_u) || !positive_finite(g.shape_v))
                     throw Error(Errc::JumpMomentUndefined, "gamma jumps need u > 0 and v > 0");
                 },
                 [](const InverseGaussianJumps& ig) {
                   if (!positive_finite(ig.mean) || !positive_finite(ig.shape))
                     throw Error(Errc::JumpMomentUndefined,
                                 "inverse Gaussian jumps need mean > 0 and shape > 0");
                 },
                 [](const ConstantJumps& c) {
                   if (!std::isfinite(c.value) || c.value < 0.0)
                     throw Error(Errc::JumpMomentUndefined, "constant jumps need c >= 0");
                 },
             },
             base);
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double base_moment(const BaseJumpFamily& base, int j) {
  return std::visit(overloaded{
                        [j](const GammaJumps& g) {
                          // v (v+1) ... (v+j-1) / u^j
                          double m = 1.0;
                          for (int i = 0; i < j; ++i) m *= (g.shape_v + i) / g.rate_u;
                          return m;
                        },
                        [j](const InverseGaussianJumps& ig) {
                          const double ratio = ig.mean / (2.0 * ig.shape);
                          double sum = 0.0;
                          double ratio_k = 1.0;
                          for (int k = 0; k < j; ++k) {
                            // (j-1+k)! / (k! (j-1-k)!)
                            double coeff = 1.0;
                            for (int i = j - k; i <= j - 1 + k; ++i) coeff *= i;
                            for (int i = 2; i <= k; ++i) coeff /= i;
                            sum += coeff * ratio_k;
                            ratio_k *= ratio;
                          }
                          return std::pow(ig.mean, j) * sum;
                        },
                        [j](const ConstantJumps& c) { return std::pow(c.value, j); },
                    },
                    base);
}

// E[B^i 1{B > c}] for c > 0.
double base_partial_moment(const BaseJumpFamily& base, int i, double c) {
  return std::visit(
      overloaded{
          [&](const GammaJumps& g) {
            return base_moment(base, i) * boost::math::gamma_q(g.shape_v + i, g.rate_u * c);
          },
          [&](const InverseGaussianJumps& ig) {
            const double mu = ig.mean, lam = ig.shape;
            auto integrand = [&](double x) {
              if (x <= 0.0) return 0.0;
              const double dens = std::sqrt(lam / (2.0 * std::numbers::pi * x * x * x)) *
                                  std::exp(-lam * (x - mu) * (x - mu) / (2.0 * mu * mu * x));
              return std::pow(x, i) * dens;
            };
            const double upper = c + mu + 40.0 * std::sqrt(mu * mu * mu / lam) + 200.0 * mu * mu / lam;
            double total = 0.0;
            constexpr int pieces = 16;
            for (int p = 0; p < pieces; ++p) {
              const double a = c + (upper - c) * p / pieces;
              const double b = c + (upper - c) * (p + 1) / pieces;
              total += numerics::integrate(integrand, a, b, 1e-15, 1e-12);
            }
            return total;
          },
          [&](const ConstantJumps& k) { return k.value > c ? std::pow(k.value, i) : 0.0; },
      },
      base);
}

double sample_base(const BaseJumpFamily& base, RandomStream& rng) {
  return std::visit(overloaded{
                        [&](const GammaJumps& g) { return sample_gamma(rng, g.shape_v, 1.0 / g.rate_u); },
                        [&](const InverseGaussianJumps& ig) {
                          return sample_inverse_gaussian(rng, ig.mean, ig.shape);
                        },
                        [](const ConstantJumps& c) { return c.value; },
                    },
                    base);
}

double base_support_min(const BaseJumpFamily& base) {
  if (const auto* c = std::get_if<ConstantJumps>(&base)) return c->value;
  return 0.0;
}

}  // namespace

void validate_jumps(const JumpFamily& family) {
  std::visit(overloaded{
                 [](const IntensityShiftedJumps& s) {
                   validate_base(s.base);
                   if (!std::isfinite(s.coupling))
                     throw Error(Errc::JumpMomentUndefined, "intensity-shifted coupling must be finite");
                 },
                 [](const auto& base) { validate_base(BaseJumpFamily(base)); },
             },
             family);
}

bool depends_on_intensity(const JumpFamily& family) noexcept {
  return std::holds_alternative<IntensityShiftedJumps>(family);
}

double moment(const JumpFamily& family, int j, double lambda_pre) {
  if (j < 1) throw Error(Errc::InvalidParameter, "moment order must be >= 1");
  return std::visit(
      overloaded{
          [&](const IntensityShiftedJumps& s) {
            const double shift = s.coupling * lambda_pre;
            double total = 0.0;
            if (shift >= 0.0) {
              // B + shift >= 0 always: plain binomial expansion.
              for (int i = 0; i <= j; ++i) {
                const double bi = i == 0 ? 1.0 : base_moment(s.base, i);
                total += binomial(j, i) * bi * std::pow(shift, j - i);
              }
              return total;
            }
            const double cut = -shift;
            for (int i = 0; i <= j; ++i) {
              total += binomial(j, i) * base_partial_moment(s.base, i, cut) * std::pow(shift, j - i);
            }
            return std::max(0.0, total);
          },
          [&](const auto& base) { return base_moment(BaseJumpFamily(base), j); },
      },
      family);
}

double sample(const JumpFamily& family, RandomStream& rng, double lambda_pre) {
  const double x = std::visit(overloaded{
                                  [&](const IntensityShiftedJumps& s) {
                                    return std::max(0.0, sample_base(s.base, rng) + s.coupling * lambda_pre);
                                  },
                                  [&](const auto& base) { return sample_base(BaseJumpFamily(base), rng); },
                              },
                              family);
  assert(x >= 0.0);
  return x;
}

double support_min(const JumpFamily& family, double lambda_pre) noexcept {
  return std::visit(overloaded{
                        [&](const IntensityShiftedJumps& s) {
                          return std::max(0.0, base_support_min(s.base) + s.coupling * lambda_pre);
                        },
                        [](const auto& base) { return base_support_min(BaseJumpFamily(base)); },
                    },
                    family);
}

std::string describe(const JumpFamily& family) {
  std::ostringstream os;
  os.precision(17);
  auto base_text = [&os](const BaseJumpFamily& base) {
    std::visit(overloaded{
                   [&](const GammaJumps& g) { os << "gamma(u=" << g.rate_u << ", v=" << g.shape_v << ")"; },
                   [&](const InverseGaussianJumps& ig) {
                     os << "inverse_gaussian(mean=" << ig.mean << ", shape=" << ig.shape << ")";
                   },
                   [&](const ConstantJumps& c) { os << "constant(c=" << c.value << ")"; },
               },
               base);
  };
  std::visit(overloaded{
                 [&](const IntensityShiftedJumps& s) {
                   os << "intensity_shifted(";
                   base_text(s.base);
                   os << ", coupling=" << s.coupling << ")";
                 },
                 [&](const auto& base) { base_text(BaseJumpFamily(base)); },
             },
             family);
  return os.str();
}

double sample_gamma(RandomStream& rng, double shape, double scale) {
  // Marsaglia-Tsang squeeze; shapes below one are boosted by U^{1/shape}.
  if (shape < 1.0) {
    const double boost = std::exp(std::log(rng.uniform()) / shape);
    return sample_gamma(rng, shape + 1.0, scale) * boost;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v * scale;
  }
}

double sample_inverse_gaussian(RandomStream& rng, double mean, double shape) {
  // Michael, Schucany and Haas transformation with multiple roots.
  const double nu = rng.normal();
  const double y = nu * nu;
  const double mu = mean;
  const double w = mu * y;
  // smaller root, written without cancellation
  const double x = mu * 2.0 * shape / (2.0 * shape + w + std::sqrt(w * w + 4.0 * shape * w));
  if (rng.uniform() <= mu / (mu + x)) return x;
  return mu * mu / x;
}

}  // namespace selfex
