#include "selfex/stats.hpp"

#include "selfex/error.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>

namespace selfex::stats {

namespace {

struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

void require_samples(std::size_t n) {
  if (n == 0) throw Error(Errc::EmptySample, "sample is empty");
}

}  // namespace

std::vector<MomentEstimate> empirical_moments(std::span<const double> samples, int j_max) {
  require_samples(samples.size());
  if (j_max < 1) throw Error(Errc::InvalidParameter, "j_max must be >= 1");
  const auto orders = static_cast<std::size_t>(j_max);
  std::vector<CompensatedSum> sums(orders);
  std::vector<double> mean(orders, 0.0), m2(orders, 0.0);
  double n = 0.0;
  for (const double x : samples) {
    n += 1.0;
    double power = 1.0;
    for (std::size_t j = 0; j < orders; ++j) {
      power *= x;
      sums[j].add(power);
      const double d = power - mean[j];
      mean[j] += d / n;
      m2[j] += d * (power - mean[j]);
    }
  }
  std::vector<MomentEstimate> out;
  out.reserve(orders);
  for (std::size_t j = 0; j < orders; ++j) {
    const double se = n > 1.0 ? std::sqrt(std::max(0.0, m2[j]) / (n - 1.0) / n) : 0.0;
    out.push_back({static_cast<int>(j + 1), sums[j].value() / n, se, samples.size()});
  }
  return out;
}

Estimate mean_estimate(std::span<const double> samples) {
  const auto m = empirical_moments(samples, 1);
  return {m[0].value, m[0].se};
}

Estimate variance_estimate(std::span<const double> samples) {
  require_samples(samples.size());
  const double n = static_cast<double>(samples.size());
  CompensatedSum sum;
  for (const double x : samples) sum.add(x);
  const double mean = sum.value() / n;
  double m2 = 0.0, m4 = 0.0;
  for (const double x : samples) {
    const double d = (x - mean) * (x - mean);
    m2 += d;
    m4 += d * d;
  }
  if (n < 2.0) return {0.0, 0.0};
  const double var = m2 / (n - 1.0);
  const double pop_var = m2 / n;
  const double se = std::sqrt(std::max(0.0, m4 / n - pop_var * pop_var) / n);
  return {var, se};
}

double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
  require_samples(samples.size());
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double above = static_cast<double>(i + 1) / n - f;
    const double below = f - static_cast<double>(i) / n;
    d = std::max({d, std::abs(above), std::abs(below)});
  }
  return d;
}

double poisson_pmf(std::int64_t k, double mean) {
  if (k < 0) return 0.0;
  if (mean == 0.0) return k == 0 ? 1.0 : 0.0;
  const double kd = static_cast<double>(k);
  return std::exp(kd * std::log(mean) - mean - std::lgamma(kd + 1.0));
}

double chi2_sf(double x, int dof) {
  if (dof < 1) throw Error(Errc::InvalidParameter, "chi-square dof must be >= 1");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(a, x);
}

GofResult poisson_gof(std::span<const std::int64_t> counts, double mean) {
  require_samples(counts.size());
  if (!(mean > 0.0)) throw Error(Errc::InvalidParameter, "Poisson mean must be > 0");
  const double n = static_cast<double>(counts.size());
  const std::int64_t max_count = *std::max_element(counts.begin(), counts.end());

  // Expected counts are cut off far in the upper tail; the last bin takes the rest.
  std::int64_t k_stop = static_cast<std::int64_t>(std::ceil(mean + 40.0 * std::sqrt(mean) + 40.0));
  k_stop = std::max(k_stop, max_count + 1);
  std::vector<double> observed(static_cast<std::size_t>(k_stop + 1), 0.0);
  for (const auto c : counts) {
    if (c < 0) throw Error(Errc::InvalidParameter, "counts must be non-negative");
    observed[static_cast<std::size_t>(c)] += 1.0;
  }

  struct Bin {
    double expected = 0.0;
    double observed = 0.0;
  };
  std::vector<Bin> bins;
  Bin current;
  double tail_expected = n;  // expected mass at k and above
  for (std::int64_t k = 0; k <= k_stop; ++k) {
    const double e = n * poisson_pmf(k, mean);
    current.expected += e;
    current.observed += observed[static_cast<std::size_t>(k)];
    tail_expected -= e;
    if (current.expected >= 5.0 && tail_expected >= 5.0) {
      bins.push_back(current);
      current = Bin{};
    }
  }
  // Remaining tail probability mass beyond k_stop (tiny) goes to the last bin.
  current.expected += std::max(0.0, tail_expected);
  if (!bins.empty() && current.expected < 5.0) {
    bins.back().expected += current.expected;
    bins.back().observed += current.observed;
  } else {
    bins.push_back(current);
  }
  if (bins.size() < 2) throw Error(Errc::DegenerateBins, "all expected mass falls into one bin");

  double chi2 = 0.0;
  for (const auto& b : bins) chi2 += (b.observed - b.expected) * (b.observed - b.expected) / b.expected;
  const int dof = static_cast<int>(bins.size()) - 1;
  return {chi2, dof, chi2_sf(chi2, dof)};
}

}  // namespace selfex::stats
