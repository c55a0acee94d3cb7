#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

namespace selfex::numerics {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct OdeTolerance {
  Scalar rel = Scalar(1e-10);
  Scalar abs = Scalar(1e-16);
};

/// Adaptive Dormand-Prince 5(4) integration of y' = rhs(t, y) from t0 to t1.
/// Error control is per component against abs + rel * max(|y|, |y_new|).
template <typename Scalar, typename Rhs>
Vector<Scalar> integrate_dopri(Rhs&& rhs, Vector<Scalar> y, Scalar t0, Scalar t1,
                               OdeTolerance<Scalar> tol = {}, std::size_t max_steps = 2'000'000) {
  using std::abs;
  using std::max;
  using std::min;
  using std::pow;
  if (t1 == t0) return y;
  if (t1 < t0) throw std::invalid_argument("integrate_dopri: t1 < t0");

  // Butcher tableau
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const Scalar span = t1 - t0;
  Scalar h = min(span, Scalar(1e-3) * max(Scalar(1), span));
  Scalar t = t0;
  Vector<Scalar> k1 = rhs(t, y);
  for (std::size_t step = 0; step < max_steps; ++step) {
    if (t + h > t1) h = t1 - t;
    const Vector<Scalar> k2 = rhs(t + c2 * h, (y + h * (a21 * k1)).eval());
    const Vector<Scalar> k3 = rhs(t + c3 * h, (y + h * (a31 * k1 + a32 * k2)).eval());
    const Vector<Scalar> k4 = rhs(t + c4 * h, (y + h * (a41 * k1 + a42 * k2 + a43 * k3)).eval());
    const Vector<Scalar> k5 =
        rhs(t + c5 * h, (y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)).eval());
    const Vector<Scalar> k6 =
        rhs(t + h, (y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)).eval());
    const Vector<Scalar> y_new =
        y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vector<Scalar> k7 = rhs(t + h, y_new);
    const Vector<Scalar> err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const Vector<Scalar> scale =
        (y.cwiseAbs().cwiseMax(y_new.cwiseAbs()) * tol.rel).array() + tol.abs;
    const Scalar err_norm =
        std::sqrt((err.cwiseQuotient(scale).squaredNorm()) / Scalar(std::max<Eigen::Index>(1, y.size())));

    if (err_norm <= Scalar(1)) {
      t += h;
      y = y_new;
      k1 = k7;
      if (t >= t1) return y;
    }
    const Scalar factor = err_norm == Scalar(0)
                              ? Scalar(5)
                              : min(Scalar(5), max(Scalar(0.2), Scalar(0.9) * pow(err_norm, Scalar(-0.2))));
    h *= factor;
    if (h <= abs(t1) * Scalar(1e-15)) throw std::runtime_error("integrate_dopri: step size underflow");
  }
  throw std::runtime_error("integrate_dopri: step budget exhausted");
}

/// Integrates through an increasing grid of output times (the first may equal
/// t0). Row i of the result is the state at times[i].
template <typename Scalar, typename Rhs>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> integrate_dopri_grid(
    Rhs&& rhs, const Vector<Scalar>& y0, Scalar t0, std::span<const Scalar> times,
    OdeTolerance<Scalar> tol = {}) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(static_cast<Eigen::Index>(times.size()),
                                                            y0.size());
  Vector<Scalar> y = y0;
  Scalar t = t0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t) throw std::invalid_argument("integrate_dopri_grid: times must be increasing");
    y = integrate_dopri<Scalar>(rhs, y, t, times[i], tol);
    t = times[i];
    out.row(static_cast<Eigen::Index>(i)) = y.transpose();
  }
  return out;
}

}  // namespace selfex::numerics
