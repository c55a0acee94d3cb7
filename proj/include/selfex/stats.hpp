#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace selfex::stats {

struct MomentEstimate {
  int order;
  double value;
  /// Sample standard deviation of x^order over sqrt(n); zero when n < 2.
  double se;
  std::size_t n;
};

/// Raw empirical moments E[x^j], j = 1..j_max, in one pass. Sums are
/// Neumaier-compensated; spreads use Welford updates.
std::vector<MomentEstimate> empirical_moments(std::span<const double> samples, int j_max);

struct Estimate {
  double value;
  double se;
};

/// Mean with its standard error.
Estimate mean_estimate(std::span<const double> samples);

/// Unbiased sample variance and its delta-method standard error
/// sqrt((m4 - s^4) / n).
Estimate variance_estimate(std::span<const double> samples);

/// sup_x |F_n(x) - F(x)| evaluated at the sorted sample points.
double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf);

struct GofResult {
  double chi2;
  int dof;
  double pvalue;
};

/// Chi-square goodness of fit of a count sample against Poisson(mean). Bins
/// are merged left to right until each holds >= 5 expected counts; the last
/// bin absorbs the upper tail. dof = bins - 1.
GofResult poisson_gof(std::span<const std::int64_t> counts, double mean);

double poisson_pmf(std::int64_t k, double mean);

/// Upper tail P(chi2_dof > x).
double chi2_sf(double x, int dof);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

}  // namespace selfex::stats
