#pragma once

#include "selfex/core_model.hpp"

#include <Eigen/Dense>

#include <span>

namespace selfex {

/// Constants of the linear-intensity moment formulas
///   m(t) = m0 + m1 e^{rho t},  v(t) = v0 + v1 e^{rho t} + v2 e^{2 rho t},
///   phi(r) = (alpha lambda0 / rho) m(r) + v(r) = phi0 + phi1 e^{rho r} + phi2 e^{2 rho r},
///   E[Lambda^2(t)] = k0 + k1 t + k2 t^2 + (C0 + C1 t) e^{rho t} + C2 e^{2 rho t}.
/// The k/C block holds the constants exactly as printed in the source
/// derivation (including its k1); see second_moment_integrated.
struct LinearMomentParams {
  double alpha = 0, lambda0 = 0, beta = 0, lambda_init = 0;
  double ex = 0, ex2 = 0;
  /// E[X^j] for j = 1..jump_moments.size(), used by moment_ode_system.
  Eigen::VectorXd jump_moments;

  double rho = 0, a = 0;
  bool critical = false;
  double m0 = 0, m1 = 0;
  double v0 = 0, v1 = 0, v2 = 0;
  double phi0 = 0, phi1 = 0, phi2 = 0;
  double k0 = 0, k1 = 0, k2 = 0, c0 = 0, c1 = 0, c2 = 0;

  /// Builds every derived constant from the primitives. In the critical
  /// regime the 1/rho constants are left at zero and only limit branches are used.
  static LinearMomentParams from_primitives(double alpha, double lambda0, double beta, double lambda_init,
                                            double ex, double ex2, Eigen::VectorXd jump_moments = {});

  /// Needs a linear drift and intensity-independent jumps; records jump
  /// moments up to `max_order`.
  static LinearMomentParams from_model(const ModelSpec& spec, int max_order = 8);
};

/// m(t) = E[lambda(t)]
double mean_intensity(const LinearMomentParams& p, double t);

/// v(t) = E[lambda(t)^2]. Critical regime: lambda^2 + A lambda t + A alpha lambda0 t^2 / 2,
/// i.e. the exact integral of v' = A m(t).
double second_moment_intensity(const LinearMomentParams& p, double t);

/// v(t) - m(t)^2, clamped at 0 within -1e-10 v(t); below that throws
/// Error{NegativeVarianceBeyondTolerance}.
double variance_intensity(const LinearMomentParams& p, double t);

/// E[lambda(r) lambda(s)] = v(r) + phi(r) (e^{rho |s - r|} - 1) with r <= s.
double covariance_intensity(const LinearMomentParams& p, double r, double s);

/// E[Lambda(t)] = integral of m over [0, t].
double mean_integrated(const LinearMomentParams& p, double t);

enum class IntegratedMethod { ClosedForm, Quadrature };

/// E[Lambda(t)^2]. ClosedForm evaluates the printed k/C constants and throws
/// Error{RhoZeroClosedForm} in the critical regime. Quadrature integrates
/// covariance_intensity over the triangle s <= r <= t (adaptive Gauss-Kronrod,
/// absolute tolerance 1e-9 max(1, result)).
double second_moment_integrated(const LinearMomentParams& p, double t, IntegratedMethod method);

/// Integrates the closed triangular system
///   m_n' = n (alpha lambda0 m_{n-1} + rho m_n) + sum_{j=0}^{n-2} C(n,j) beta^{n-j} E[X^{n-j}] m_{j+1}
/// with m_n(0) = lambda_init^n (Dormand-Prince, rel tol 1e-10).
/// Row i holds m_1..m_{n_max} at t_grid[i].
Eigen::MatrixXd moment_ode_system(const LinearMomentParams& p, int n_max, std::span<const double> t_grid);

}  // namespace selfex
