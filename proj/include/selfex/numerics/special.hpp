#pragma once

#include <cmath>

namespace selfex::numerics {

/// (e^x - 1) / x, continuous at 0.
template <typename Scalar>
Scalar exprel(Scalar x) {
  using std::abs;
  using std::expm1;
  if (abs(x) < Scalar(1e-5)) return Scalar(1) + x / Scalar(2) + x * x / Scalar(6);
  return expm1(x) / x;
}

/// (e^x - 1 - x) / x^2, continuous at 0 (value 1/2).
template <typename Scalar>
Scalar exprel2(Scalar x) {
  using std::abs;
  using std::expm1;
  if (abs(x) < Scalar(1e-2)) {
    // sum_{k>=0} x^k / (k+2)!
    Scalar term = Scalar(0.5), sum = Scalar(0);
    for (int k = 0; k < 10; ++k) {
      sum += term;
      term *= x / Scalar(k + 3);
    }
    return sum;
  }
  return (expm1(x) - x) / (x * x);
}

/// (1 - e^{-a dt}) / a, with the a -> 0 limit dt.
template <typename Scalar>
Scalar decay_integral(Scalar a, Scalar dt) {
  return dt * exprel(-a * dt);
}

}  // namespace selfex::numerics
