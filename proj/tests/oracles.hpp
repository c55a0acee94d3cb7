#pragma once

// Independent reference computations for the test suites. None of these
// reuse library numerics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

using State = std::vector<double>;
using Rhs = std::function<State(double, const State&)>;

/// Classical fixed-step RK4 from t0 to t1.
inline State rk4(const Rhs& f, State y, double t0, double t1, int steps) {
  const double h = (t1 - t0) / steps;
  auto axpy = [](const State& a, double s, const State& b) {
    State r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + s * b[i];
    return r;
  };
  double t = t0;
  for (int i = 0; i < steps; ++i) {
    const State k1 = f(t, y);
    const State k2 = f(t + h / 2, axpy(y, h / 2, k1));
    const State k3 = f(t + h / 2, axpy(y, h / 2, k2));
    const State k4 = f(t + h, axpy(y, h, k3));
    for (std::size_t j = 0; j < y.size(); ++j) y[j] += h / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    t += h;
  }
  return y;
}

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3;
}

/// Poisson pmf by the product recursion p_k = p_{k-1} mu / k.
inline double poisson_pmf(std::int64_t k, double mu) {
  double p = std::exp(-mu);
  for (std::int64_t i = 1; i <= k; ++i) p *= mu / static_cast<double>(i);
  return p;
}

/// sup_x |F_n(x) - F(x)| scanned over every sample point and its left limit,
/// counting F_n by brute force.
inline double brute_force_ks(const std::vector<double>& xs, const std::function<double(double)>& cdf) {
  const double n = static_cast<double>(xs.size());
  double d = 0;
  for (const double x : xs) {
    double at = 0, below = 0;
    for (const double y : xs) {
      if (y <= x) at += 1;
      if (y < x) below += 1;
    }
    d = std::max({d, std::abs(at / n - cdf(x)), std::abs(below / n - cdf(x))});
  }
  return d;
}

inline double mean(const std::vector<double>& xs) {
  double s = 0;
  for (const double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

/// Standard error of the mean.
inline double se(const std::vector<double>& xs) {
  const double m = mean(xs);
  double s = 0;
  for (const double x : xs) s += (x - m) * (x - m);
  const double n = static_cast<double>(xs.size());
  return std::sqrt(s / (n - 1) / n);
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace oracle
