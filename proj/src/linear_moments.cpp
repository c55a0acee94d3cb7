#include "selfex/linear_moments.hpp"

#include "selfex/error.hpp"
#include "selfex/numerics/ode.hpp"
#include "selfex/numerics/quadrature.hpp"
#include "selfex/numerics/special.hpp"

#include <algorithm>
#include <cmath>

namespace selfex {

using numerics::exprel;
using numerics::exprel2;

LinearMomentParams LinearMomentParams::from_primitives(double alpha, double lambda0, double beta,
                                                       double lambda_init, double ex, double ex2,
                                                       Eigen::VectorXd jump_moments) {
  LinearMomentParams p;
  p.alpha = alpha;
  p.lambda0 = lambda0;
  p.beta = beta;
  p.lambda_init = lambda_init;
  p.ex = ex;
  p.ex2 = ex2;
  if (jump_moments.size() == 0) {
    jump_moments.resize(2);
    jump_moments << ex, ex2;
  }
  p.jump_moments = std::move(jump_moments);

  p.rho = beta * ex - alpha;
  p.a = 2.0 * alpha * lambda0 + beta * beta * ex2;
  p.critical = is_critical(p.rho, beta * ex, alpha);
  if (p.critical) return p;

  const double rho = p.rho, rho2 = rho * rho, al = alpha * lambda0, lam = lambda_init;
  p.m0 = -al / rho;
  p.m1 = al / rho + lam;
  p.v0 = p.a * al / (2.0 * rho2);
  p.v1 = -p.a * (al / rho + lam) / rho;
  p.v2 = p.a * (al + 2.0 * rho * lam) / (2.0 * rho2) + lam * lam;
  p.phi0 = p.v0 - p.m0 * p.m0;
  p.phi1 = p.v1 - p.m0 * p.m1;
  p.phi2 = p.v2;

  const double m0 = p.m0, m1 = p.m1, v0 = p.v0, v1 = p.v1, v2 = p.v2;
  p.k0 = (2.0 * m0 * (m0 - 2.0 * m1) - 2.0 * v0 + 2.0 * v1 + v2) / rho2;
  p.k1 = (2.0 * m0 * (m0 - rho2 * m1) - 2.0 * v0) / rho;
  p.k2 = m0 * m0;
  p.c0 = 2.0 * (m0 * (2.0 * m1 - m0) + v0 - v1 - v2) / rho2;
  p.c1 = 2.0 * (v1 - m0 * m1) / rho;
  p.c2 = v2 / rho2;
  return p;
}

LinearMomentParams LinearMomentParams::from_model(const ModelSpec& spec, int max_order) {
  const auto* linear = std::get_if<LinearDrift>(&spec.drift);
  if (linear == nullptr) throw Error(Errc::NotLinearDrift, "linear moments need a linear drift");
  if (depends_on_intensity(spec.jumps))
    throw Error(Errc::IntensityDependentJumps, "linear moments need intensity-independent jumps");
  Eigen::VectorXd moments(std::max(2, max_order));
  for (Eigen::Index j = 0; j < moments.size(); ++j) moments[j] = moment(spec.jumps, static_cast<int>(j + 1));
  return from_primitives(linear->alpha, linear->lambda0, spec.beta, spec.lambda_init, moments[0], moments[1],
                         moments);
}

double mean_intensity(const LinearMomentParams& p, double t) {
  if (p.critical) return p.lambda_init * std::exp(p.rho * t) + p.alpha * p.lambda0 * t * exprel(p.rho * t);
  return p.m0 + p.m1 * std::exp(p.rho * t);
}

double second_moment_intensity(const LinearMomentParams& p, double t) {
  if (p.critical) {
    const double e = std::exp(p.rho * t), x = exprel(p.rho * t), lam = p.lambda_init;
    return lam * lam * e * e + p.a * lam * t * e * x + 0.5 * p.a * p.alpha * p.lambda0 * t * t * x * x;
  }
  const double e = std::exp(p.rho * t);
  return p.v0 + p.v1 * e + p.v2 * e * e;
}

double variance_intensity(const LinearMomentParams& p, double t) {
  const double v = second_moment_intensity(p, t);
  const double m = mean_intensity(p, t);
  const double var = v - m * m;
  if (var >= 0.0) return var;
  if (var < -1e-10 * std::abs(v))
    throw Error(Errc::NegativeVarianceBeyondTolerance, "v(t) - m(t)^2 = " + std::to_string(var));
  return 0.0;
}

double covariance_intensity(const LinearMomentParams& p, double r, double s) {
  if (r > s) std::swap(r, s);
  const double gap = s - r;
  const double v = second_moment_intensity(p, r);
  const double m = mean_intensity(p, r);
  if (p.critical) {
    // phi (e^{rho gap} - 1) with the alpha lambda0 / rho factor folded into exprel.
    return v + p.alpha * p.lambda0 * m * gap * exprel(p.rho * gap) + v * std::expm1(p.rho * gap);
  }
  const double phi = p.alpha * p.lambda0 / p.rho * m + v;
  return v + phi * std::expm1(p.rho * gap);
}

double mean_integrated(const LinearMomentParams& p, double t) {
  const double x = p.rho * t;
  return p.lambda_init * t * exprel(x) + p.alpha * p.lambda0 * t * t * exprel2(x);
}

double second_moment_integrated(const LinearMomentParams& p, double t, IntegratedMethod method) {
  if (t <= 0.0) return 0.0;
  if (method == IntegratedMethod::ClosedForm) {
    if (p.critical)
      throw Error(Errc::RhoZeroClosedForm, "closed form needs rho != 0; use the quadrature method");
    const double e = std::exp(p.rho * t);
    return p.k0 + p.k1 * t + p.k2 * t * t + (p.c0 + p.c1 * t) * e + p.c2 * e * e;
  }

  // 2 * int_0^t int_s^t E[lambda(s) lambda(r)] dr ds
  auto outer = [&](double tol) {
    auto row = [&](double s) {
      auto inner = [&](double r) { return covariance_intensity(p, s, r); };
      return numerics::integrate(inner, s, t, 0.1 * tol / t, 1e-14);
    };
    return 2.0 * numerics::integrate(row, 0.0, t, 0.5 * tol, 1e-14);
  };
  const double rough = outer(1e-6);
  return outer(1e-9 * std::max(1.0, std::abs(rough)));
}

Eigen::MatrixXd moment_ode_system(const LinearMomentParams& p, int n_max, std::span<const double> t_grid) {
  if (n_max < 1) throw Error(Errc::InvalidParameter, "n_max must be >= 1");
  if (n_max > p.jump_moments.size())
    throw Error(Errc::OrderTooHigh, "jump moments are available up to order " +
                                        std::to_string(p.jump_moments.size()));

  // Linear system y' = M y + b for y = (m_1, ..., m_n).
  const Eigen::Index n = n_max;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  const double al = p.alpha * p.lambda0;
  for (int order = 1; order <= n_max; ++order) {
    const Eigen::Index row = order - 1;
    M(row, row) += order * p.rho;
    if (order == 1) {
      b[row] += al;  // m_0 = 1
    } else {
      M(row, row - 1) += order * al;
    }
    double binom = 1.0;  // C(order, j)
    for (int j = 0; j <= order - 2; ++j) {
      const int power = order - j;
      const double coeff = binom * std::pow(p.beta, power) * p.jump_moments[power - 1];
      M(row, j) += coeff;  // multiplies m_{j+1}
      binom = binom * (order - j) / (j + 1);
    }
  }

  Eigen::VectorXd y0(n);
  for (Eigen::Index i = 0; i < n; ++i) y0[i] = std::pow(p.lambda_init, static_cast<double>(i + 1));
  auto rhs = [&](double, const Eigen::VectorXd& y) -> Eigen::VectorXd { return M * y + b; };
  numerics::OdeTolerance<double> tol{1e-10, 1e-300};
  return numerics::integrate_dopri_grid<double>(rhs, y0, 0.0, t_grid, tol);
}

}  // namespace selfex
