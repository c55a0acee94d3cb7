#include "selfex/cir.hpp"

#include "selfex/error.hpp"
#include "selfex/numerics/ode.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace selfex {

namespace {

constexpr numerics::OdeTolerance<double> kTol{1e-12, 1e-300};

void require_time(double t) {
  if (!(t >= 0.0)) throw Error(Errc::NegativeDuration, "t must be >= 0");
}

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

void CirParams::validate() const {
  if (!(c0 >= 0.0)) throw Error(Errc::InvalidParameter, "c0 must be >= 0");
  if (!(c1 > 0.0)) throw Error(Errc::InvalidParameter, "c1 must be > 0");
  if (!(c2 > 0.0)) throw Error(Errc::InvalidParameter, "c2 must be > 0");
  if (!(y0 >= 0.0)) throw Error(Errc::InvalidParameter, "y0 must be >= 0");
}

double cir_mean(const CirParams& p, double t) {
  const double decay = std::exp(-p.c1 * t);
  return -p.c0 / p.c1 * std::expm1(-p.c1 * t) + p.y0 * decay;
}

Eigen::VectorXd cir_moments(const CirParams& p, int n_max, double t) {
  p.validate();
  require_time(t);
  if (n_max < 1) throw Error(Errc::InvalidParameter, "n_max must be >= 1");
  Eigen::VectorXd y(n_max);
  for (int n = 1; n <= n_max; ++n) y[n - 1] = std::pow(p.y0, n);
  auto rhs = [&](double, const Eigen::VectorXd& s) {
    Eigen::VectorXd d(s.size());
    for (int n = 1; n <= n_max; ++n) {
      const double lower = n == 1 ? 1.0 : s[n - 2];
      d[n - 1] = -n * p.c1 * s[n - 1] + (n * p.c0 + 0.5 * n * (n - 1) * p.c2) * lower;
    }
    return d;
  };
  return numerics::integrate_dopri<double>(rhs, y, 0.0, t, kTol);
}

Eigen::MatrixXd cir_joint_moments(const CirParams& p, int m_max, int n_max, double t) {
  p.validate();
  require_time(t);
  if (m_max < 0 || n_max < 0) throw Error(Errc::InvalidParameter, "orders must be >= 0");
  const int total = m_max + n_max;

  // State index of (m, n) for m + n <= total, excluding the constant (0, 0).
  std::vector<std::vector<int>> index(total + 1, std::vector<int>(total + 1, -1));
  int size = 0;
  for (int m = 0; m <= total; ++m)
    for (int n = 0; m + n <= total; ++n)
      if (m + n > 0) index[m][n] = size++;

  auto value = [&](const Eigen::VectorXd& s, int m, int n) {
    if (m == 0 && n == 0) return 1.0;
    return s[index[m][n]];
  };
  auto rhs = [&](double, const Eigen::VectorXd& s) {
    Eigen::VectorXd d(s.size());
    for (int m = 0; m <= total; ++m) {
      for (int n = 0; m + n <= total; ++n) {
        if (m + n == 0) continue;
        double r = -n * p.c1 * value(s, m, n);
        if (n > 0) r += (n * p.c0 + 0.5 * n * (n - 1) * p.c2) * value(s, m, n - 1);
        if (m > 0) r += m * value(s, m - 1, n + 1);
        d[index[m][n]] = r;
      }
    }
    return d;
  };

  Eigen::VectorXd y = Eigen::VectorXd::Zero(size);
  for (int n = 1; n <= total; ++n) y[index[0][n]] = std::pow(p.y0, n);
  if (size > 0) y = numerics::integrate_dopri<double>(rhs, y, 0.0, t, kTol);

  Eigen::MatrixXd out(m_max + 1, n_max + 1);
  for (int m = 0; m <= m_max; ++m)
    for (int n = 0; n <= n_max; ++n) out(m, n) = value(y, m, n);
  return out;
}

double GammaLaw::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (scale == 0.0) return 1.0;
  return boost::math::gamma_p(shape, x / scale);
}

GammaLaw cir_marginal(const CirParams& p, double t) {
  p.validate();
  if (p.y0 != 0.0) throw Error(Errc::InvalidParameter, "the marginal law needs y0 = 0");
  if (!(t > 0.0)) throw Error(Errc::NegativeDuration, "t must be > 0");
  const GammaLaw law{2.0 * p.c0 / p.c2, -p.c2 * std::expm1(-p.c1 * t) / (2.0 * p.c1)};
  if (p.c0 == 0.0) return law;

  const Eigen::VectorXd y = cir_moments(p, 2, t);
  const double var = y[1] - y[0] * y[0];
  const double mean_gap = rel_gap(law.mean(), y[0]);
  const double var_gap = rel_gap(law.variance(), var);
  if (mean_gap > 1e-8 || var_gap > 1e-8)
    throw Error(Errc::InconsistentWithMomentODE,
                "gamma law vs moment ODE: mean gap " + std::to_string(mean_gap) + ", variance gap " +
                    std::to_string(var_gap));
  return law;
}

CirDraw cir_draw_euler(const CirParams& p, double t, double step, RandomStream& rng) {
  require_time(t);
  if (!(step > 0.0)) throw Error(Errc::InvalidParameter, "step must be > 0");
  if (t == 0.0) return {p.y0, 0.0};
  const auto steps = static_cast<long>(std::ceil(t / step - 1e-9));
  const double h = t / static_cast<double>(steps);
  const double root_h = std::sqrt(h);
  double y = p.y0, integral = 0.0;
  for (long i = 0; i < steps; ++i) {
    const double pos = std::max(y, 0.0);
    const double next = y + (p.c0 - p.c1 * pos) * h + std::sqrt(p.c2 * pos) * root_h * rng.normal();
    integral += 0.5 * h * (pos + std::max(next, 0.0));
    y = next;
  }
  return {std::max(y, 0.0), integral};
}

double cir_sample_euler(const CirParams& p, double t, double step, RandomStream& rng) {
  return cir_draw_euler(p, t, step, rng).value;
}

}  // namespace selfex
