#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace selfex::numerics {

namespace detail {

// Gauss-Kronrod 7-15 nodes on [-1, 1] (positive half, centre last).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
void gk15(F& f, double a, double b, double& result, double& error) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double sum = f(centre - dx) + f(centre + dx);
    kronrod += kKronrodWeights[i] * sum;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * sum;
  }
  result = kronrod * half;
  error = std::abs((kronrod - gauss) * half);
}

template <typename F>
double adaptive(F& f, double a, double b, double tol, int depth) {
  double result, error;
  gk15(f, a, b, result, error);
  if (error <= tol || std::abs(b - a) < 1e-14 * std::max(1.0, std::abs(a))) return result;
  if (depth <= 0) throw std::runtime_error("adaptive quadrature: depth exhausted");
  const double mid = 0.5 * (a + b);
  return adaptive(f, a, mid, 0.5 * tol, depth - 1) + adaptive(f, mid, b, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (7-15) quadrature of f over [a, b].
template <typename F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-12, double rel_tol = 1e-12,
                 int max_depth = 40) {
  if (a == b) return 0.0;
  double whole, error;
  detail::gk15(f, a, b, whole, error);
  const double tol = std::max(abs_tol, rel_tol * std::abs(whole));
  if (error <= tol) return whole;
  return detail::adaptive(f, a, b, tol, max_depth);
}

}  // namespace selfex::numerics
