#pragma once

#include "selfex/random.hpp"

#include <Eigen/Dense>

namespace selfex {

/// dY = (c0 - c1 Y) dt + sqrt(c2 Y) dB, Y(0) = y0.
struct CirParams {
  double c0 = 0.0;
  double c1 = 1.0;
  double c2 = 1.0;
  double y0 = 0.0;
  bool operator==(const CirParams&) const = default;

  /// Throws Error{InvalidParameter}.
  void validate() const;
};

/// E[Y(t)^n] for n = 1..n_max (entry n-1), from
///   y_n' = -n c1 y_n + (n c0 + n(n-1) c2 / 2) y_{n-1},  y_0 = 1, y_n(0) = y0^n.
Eigen::VectorXd cir_moments(const CirParams& p, int n_max, double t);

/// y_1 in closed form: (c0/c1)(1 - e^{-c1 t}) + y0 e^{-c1 t}.
double cir_mean(const CirParams& p, double t);

/// Table with entry (m, n) = E[(int_0^t Y)^m Y(t)^n] for m <= m_max, n <= n_max.
/// Every (m', n') with m' + n' <= m_max + n_max is integrated jointly.
Eigen::MatrixXd cir_joint_moments(const CirParams& p, int m_max, int n_max, double t);

struct GammaLaw {
  double shape;
  double scale;

  double mean() const noexcept { return shape * scale; }
  double variance() const noexcept { return shape * scale * scale; }
  double cdf(double x) const;
};

/// Law of Y(t) started at 0: Gamma(2 c0 / c2, c2 (1 - e^{-c1 t}) / (2 c1)).
/// Its mean and variance are checked against cir_moments to 1e-8 relative;
/// a mismatch throws Error{InconsistentWithMomentODE}.
GammaLaw cir_marginal(const CirParams& p, double t);

/// Y(t) by full-truncation Euler with the largest step <= `step` that divides t.
/// The returned value is max(Y, 0).
double cir_sample_euler(const CirParams& p, double t, double step, RandomStream& rng);

struct CirDraw {
  double value;
  /// Trapezoidal integral of the truncated path over [0, t].
  double integral;
};

/// Same scheme as cir_sample_euler, also accumulating int_0^t Y.
CirDraw cir_draw_euler(const CirParams& p, double t, double step, RandomStream& rng);

}  // namespace selfex
