#include "selfex/scaling_limit.hpp"

#include "selfex/ensemble.hpp"
#include "selfex/error.hpp"
#include "selfex/numerics/special.hpp"
#include "selfex/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace selfex {

namespace {

constexpr double kSlackSe = 3.0;
constexpr double kBandRel = 0.05;
constexpr double kKsThreshold = 0.05;
constexpr double kPolyMargin = 1.5;
constexpr int kGridSteps = 10;

std::uint64_t level_seed(std::uint64_t seed, std::size_t k) {
  return seed ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(k) + 1));
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

struct LevelSamples {
  std::vector<double> times;
  /// scaled intensity, one vector per grid time
  std::vector<std::vector<double>> lambda_hat;
  /// scaled compensator at the horizon
  std::vector<double> integral_hat;
};

LevelSamples simulate_level(const ScalingLevel& level, double t, std::size_t n_paths, std::uint64_t seed,
                            unsigned workers) {
  const ValidatedModel model = validate_model(level.model);
  const SimConfig cfg = SimConfig::defaults_for(model, t, t / kGridSteps);
  struct Draw {
    std::vector<double> lambda;
    double integral = 0.0;
  };
  const auto draws = map_paths(
      model, cfg, n_paths, seed,
      [&](const Path& p, std::size_t) {
        Draw d;
        d.lambda.reserve(p.grid.size());
        for (const auto& row : p.grid) d.lambda.push_back(level.a * row.lambda);
        d.integral = level.a * p.grid.back().compensator;
        return d;
      },
      workers);

  LevelSamples s;
  s.times = cfg.grid_times();
  s.lambda_hat.assign(s.times.size(), std::vector<double>(n_paths));
  s.integral_hat.resize(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) {
    for (std::size_t r = 0; r < s.times.size(); ++r) s.lambda_hat[r][i] = draws[i].lambda[r];
    s.integral_hat[i] = draws[i].integral;
  }
  return s;
}

// Noise-free limit used for degenerate (beta = 0) families.
double deterministic_integral(const CirParams& c, double t) {
  const double one_minus = -std::expm1(-c.c1 * t);
  return c.c0 / c.c1 * t - c.c0 / (c.c1 * c.c1) * one_minus + c.y0 * one_minus / c.c1;
}

double point_mass_ks(const std::vector<double>& samples, double x0) {
  std::size_t below = 0, above = 0;
  for (const double x : samples) {
    if (x < x0) ++below;
    if (x > x0) ++above;
  }
  const double n = static_cast<double>(samples.size());
  return std::max(below, above) / n;
}

void add_series_checks(ConvergenceReport& report, const std::string& stat, const std::string& candidate) {
  const auto rows = report.series(stat, candidate);
  if (rows.empty()) return;

  bool monotone = true;
  std::string detail;
  bool resolved = true;
  std::string resolution;
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    const double slack = kSlackSe * std::hypot(rows[k].se, rows[k + 1].se);
    if (!(rows[k + 1].abs_error < rows[k].abs_error + slack)) {
      monotone = false;
      detail += "v=" + fmt(rows[k + 1].v) + " error " + fmt(rows[k + 1].abs_error) + " >= " +
                fmt(rows[k].abs_error) + " + " + fmt(slack) + "; ";
    }
    const double gap = std::abs(rows[k].abs_error - rows[k + 1].abs_error);
    const double se = std::hypot(rows[k].se, rows[k + 1].se);
    if (se > 0.5 * gap) {
      resolved = false;
      resolution += "InsufficientPaths at v=" + fmt(rows[k + 1].v) + ": se " + fmt(se) + " > gap/2 " +
                    fmt(0.5 * gap) + "; ";
    }
  }
  report.checks.push_back({"monotone:" + stat, monotone, false, monotone ? "errors decrease" : detail});
  if (rows.size() > 1) report.checks.push_back({"resolution:" + stat, resolved, true, resolved ? "ok" : resolution});

  const auto& last = rows.back();
  const double band = kBandRel * std::abs(last.reference) + kSlackSe * last.se;
  const bool ok = last.abs_error <= band;
  report.checks.push_back({"final_band:" + stat, ok, false,
                           "error " + fmt(last.abs_error) + (ok ? " <= " : " > ") + "band " + fmt(band)});
}

void add_polynomial_checks(ConvergenceReport& report, const std::vector<LevelSamples>& levels) {
  if (levels.empty()) return;
  const auto& times = levels.front().times;
  for (int n = 1; n <= 3; ++n) {
    auto moment_at = [&](const LevelSamples& s, std::size_t r) {
      return stats::empirical_moments(s.lambda_hat[r], n).back().value;
    };
    double c = 0.0;
    for (std::size_t r = 0; r < times.size(); ++r)
      c = std::max(c, moment_at(levels.front(), r) / std::pow(1.0 + times[r], n));
    c *= kPolyMargin;
    bool ok = true;
    std::string detail = "bound " + fmt(c) + " (1+t)^" + std::to_string(n);
    for (const auto& s : levels) {
      for (std::size_t r = 0; r < times.size(); ++r) {
        const double m = moment_at(s, r);
        if (m > c * std::pow(1.0 + times[r], n)) {
          ok = false;
          detail += "; exceeded at t=" + fmt(times[r]) + " (" + fmt(m) + ")";
        }
      }
    }
    report.checks.push_back({"polynomial_bound:m" + std::to_string(n), ok, false, detail});
  }
}

void add_third_order(ConvergenceReport& report, const ScalingFamily& family) {
  std::string detail;
  bool decreasing = true;
  for (std::size_t k = 0; k < family.levels.size(); ++k) {
    detail += (k ? ", " : "") + fmt(family.levels[k].third_order);
    if (k > 0 && !(family.levels[k].third_order < family.levels[k - 1].third_order)) decreasing = false;
  }
  report.checks.push_back({"third_order_decreasing", decreasing, true, "a^2 beta^3 E[X^3]: " + detail});
}

ConvergenceReport make_report(const ScalingFamily& family, std::string quantity, double t, std::size_t n_paths) {
  if (family.levels.empty()) throw Error(Errc::InvalidParameter, "family has no levels");
  if (family.candidates.empty()) throw Error(Errc::InvalidParameter, "family has no limit candidate");
  if (!(t >= 0.0)) throw Error(Errc::NegativeDuration, "t must be >= 0");
  if (n_paths < 2) throw Error(Errc::InvalidParameter, "at least two paths are needed");
  ConvergenceReport report;
  report.quantity = std::move(quantity);
  report.policy = family.policy;
  report.t = t;
  report.n_paths = n_paths;
  report.degenerate = family.degenerate();
  return report;
}

ConvergenceRow row_for(const ScalingLevel& level, std::string stat, const LimitCandidate& c, double empirical,
                       double reference, double se) {
  return {level.v, level.a, std::move(stat), c.name, empirical, reference, se, std::abs(empirical - reference)};
}

}  // namespace

std::string to_string(InitialPolicy policy) {
  return policy == InitialPolicy::Vanishing ? "vanishing" : "at_level";
}

bool ScalingFamily::degenerate() const {
  return !levels.empty() &&
         std::all_of(levels.begin(), levels.end(), [](const ScalingLevel& l) { return l.beta == 0.0; });
}

ScalingFamily gamma_family(double c0, double c1, double u, const std::vector<double>& v_list,
                           InitialPolicy policy) {
  if (!(c0 > 0.0 && c1 > 0.0 && u > 0.0)) throw Error(Errc::InvalidParameter, "c0, c1, u must be > 0");
  if (v_list.empty()) throw Error(Errc::InvalidParameter, "v_list is empty");
  for (std::size_t k = 0; k < v_list.size(); ++k) {
    if (!(v_list[k] > 0.0)) throw Error(Errc::InvalidParameter, "every v_k must be > 0");
    if (k > 0 && !(v_list[k] < v_list[k - 1]))
      throw Error(Errc::InvalidParameter, "v_list must be strictly decreasing");
  }

  ScalingFamily family;
  family.policy = policy;
  for (const double v : v_list) {
    const double g = std::tgamma(v);
    ScalingLevel level;
    level.v = v;
    level.a = 1.0 / g;
    level.beta = std::sqrt(g / (v * (1.0 + v)));
    level.lambda0 = c0 * std::sqrt(g * (1.0 + v) / v);
    const double ex = v / u;
    const double ex3 = v * (v + 1.0) * (v + 2.0) / (u * u * u);
    level.third_order = level.a * level.a * std::pow(level.beta, 3) * ex3;
    const double lambda_init = policy == InitialPolicy::Vanishing ? v * level.lambda0 : level.lambda0;
    level.model = ModelSpec{LinearDrift{level.beta * ex + c1, level.lambda0}, level.beta, GammaJumps{u, v},
                            lambda_init};
    family.levels.push_back(std::move(level));
  }

  const double y0 = policy == InitialPolicy::Vanishing ? 0.0 : c0;
  family.candidates = {
      {"family_limit", {c0 / u + c1 * c0, c1, 1.0 / (u * u), y0}},
      {"level_c0_over_u", {c0 / u, c1, 1.0 / (u * u), y0}},
      {"printed_example", {c0, c1 / u, 1.0 / (u * u), y0}},
  };
  return family;
}

bool ConvergenceReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CriterionCheck& c) { return c.informational || c.pass; });
}

std::vector<ConvergenceRow> ConvergenceReport::series(const std::string& stat, const std::string& candidate) const {
  std::vector<ConvergenceRow> out;
  for (const auto& r : rows)
    if (r.stat == stat && r.candidate == candidate) out.push_back(r);
  return out;
}

const CriterionCheck* ConvergenceReport::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string stat_name(const ConvergenceReport& report, const ConvergenceRow& row) {
  return row.stat + ":" + to_string(report.policy) + ":" + row.candidate;
}

ConvergenceReport convergence_experiment_intensity(const ScalingFamily& family, double t, std::size_t n_paths,
                                                   std::uint64_t seed, unsigned workers) {
  ConvergenceReport report = make_report(family, "intensity", t, n_paths);
  if (t == 0.0) {
    for (const auto& level : family.levels)
      for (const auto& c : family.candidates) {
        const double x = level.a * level.model.lambda_init;
        report.rows.push_back(row_for(level, "mean_lambda", c, x, c.cir.y0, 0.0));
        report.rows.push_back(row_for(level, "var_lambda", c, 0.0, 0.0, 0.0));
      }
    report.checks.push_back({"trivial_t0", true, false, "t = 0"});
    return report;
  }

  std::vector<LevelSamples> samples;
  for (std::size_t k = 0; k < family.levels.size(); ++k) {
    const auto& level = family.levels[k];
    samples.push_back(simulate_level(level, t, n_paths, level_seed(seed, k), workers));
    const auto& x = samples.back().lambda_hat.back();
    const auto mean = stats::mean_estimate(x);
    const auto var = stats::variance_estimate(x);
    for (const auto& c : family.candidates) {
      double ref_mean, ref_var;
      if (report.degenerate) {
        ref_mean = cir_mean(c.cir, t);
        ref_var = 0.0;
      } else {
        const Eigen::VectorXd y = cir_moments(c.cir, 2, t);
        ref_mean = y[0];
        ref_var = y[1] - y[0] * y[0];
      }
      report.rows.push_back(row_for(level, "mean_lambda", c, mean.value, ref_mean, mean.se));
      report.rows.push_back(row_for(level, "var_lambda", c, var.value, ref_var, var.se));
      if (report.degenerate) {
        report.rows.push_back(row_for(level, "ks_lambda", c, point_mass_ks(x, ref_mean), 0.0, 0.0));
      } else if (c.cir.y0 == 0.0) {
        const GammaLaw law = cir_marginal(c.cir, t);
        const double ks = stats::ks_distance(x, [&](double y) { return law.cdf(y); });
        report.rows.push_back(row_for(level, "ks_lambda", c, ks, 0.0, 0.0));
      }
    }
  }

  const std::string& primary = family.candidates.front().name;
  add_series_checks(report, "mean_lambda", primary);
  add_series_checks(report, "var_lambda", primary);
  const auto ks_rows = report.series("ks_lambda", primary);
  if (!ks_rows.empty()) {
    bool decreasing = true;
    for (std::size_t k = 0; k + 1 < ks_rows.size(); ++k)
      if (!(ks_rows[k + 1].empirical < ks_rows[k].empirical)) decreasing = false;
    std::string values;
    for (const auto& r : ks_rows) values += (values.empty() ? "" : ", ") + fmt(r.empirical);
    report.checks.push_back({"monotone:ks_lambda", decreasing, false, "ks by level: " + values});
    const double last = ks_rows.back().empirical;
    const bool small = last <= kKsThreshold;
    report.checks.push_back(
        {"ks_threshold", small, false, "ks " + fmt(last) + (small ? " <= " : " > ") + fmt(kKsThreshold)});
  }
  add_polynomial_checks(report, samples);
  add_third_order(report, family);
  return report;
}

ConvergenceReport convergence_experiment_integrated(const ScalingFamily& family, double t, std::size_t n_paths,
                                                    std::uint64_t seed, unsigned workers) {
  ConvergenceReport report = make_report(family, "integrated", t, n_paths);
  if (t == 0.0) {
    for (const auto& level : family.levels)
      for (const auto& c : family.candidates) {
        report.rows.push_back(row_for(level, "mean_Lambda", c, 0.0, 0.0, 0.0));
        report.rows.push_back(row_for(level, "m2_Lambda", c, 0.0, 0.0, 0.0));
      }
    report.checks.push_back({"trivial_t0", true, false, "t = 0"});
    return report;
  }

  for (std::size_t k = 0; k < family.levels.size(); ++k) {
    const auto& level = family.levels[k];
    const LevelSamples s = simulate_level(level, t, n_paths, level_seed(seed, k), workers);
    const auto m = stats::empirical_moments(s.integral_hat, 2);
    for (const auto& c : family.candidates) {
      double ref1, ref2;
      if (report.degenerate) {
        ref1 = deterministic_integral(c.cir, t);
        ref2 = ref1 * ref1;
      } else {
        const Eigen::MatrixXd y = cir_joint_moments(c.cir, 2, 0, t);
        ref1 = y(1, 0);
        ref2 = y(2, 0);
      }
      report.rows.push_back(row_for(level, "mean_Lambda", c, m[0].value, ref1, m[0].se));
      report.rows.push_back(row_for(level, "m2_Lambda", c, m[1].value, ref2, m[1].se));
    }
  }

  const std::string& primary = family.candidates.front().name;
  add_series_checks(report, "mean_Lambda", primary);
  add_series_checks(report, "m2_Lambda", primary);
  return report;
}

namespace {

DetLimitRow run_eps(double lambda_init, double alpha, double beta, const JumpFamily& jumps, double eps,
                    double horizon, std::size_t n_paths, std::uint64_t seed, unsigned workers) {
  const ModelSpec spec{LinearDrift{alpha, lambda_init}, beta, jumps, lambda_init};
  const ValidatedModel model = validate_model(spec);
  const SimConfig cfg = SimConfig::defaults_for(model, horizon, horizon);
  const auto counts = map_paths(
      model, cfg, n_paths, seed,
      [](const Path& p, std::size_t) { return static_cast<std::int64_t>(p.grid.back().count); }, workers);

  const double rho = beta * moment(jumps, 1) - alpha;
  const double mean_ref = lambda_init * horizon * numerics::exprel(rho * horizon);
  const auto gof = stats::poisson_gof(counts, mean_ref);
  double sum = 0.0;
  for (const auto c : counts) sum += static_cast<double>(c);
  return {eps, rho, gof.chi2, gof.dof, gof.pvalue, sum / static_cast<double>(n_paths), mean_ref};
}

void check_eps_list(const std::vector<double>& eps_list, double horizon, std::size_t n_paths) {
  if (eps_list.empty()) throw Error(Errc::InvalidParameter, "eps_list is empty");
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    if (!(eps_list[k] > 0.0)) throw Error(Errc::InvalidParameter, "every eps must be > 0");
    if (k > 0 && !(eps_list[k] < eps_list[k - 1]))
      throw Error(Errc::InvalidParameter, "eps_list must be strictly decreasing");
  }
  if (!(horizon > 0.0)) throw Error(Errc::InvalidParameter, "horizon must be > 0");
  if (n_paths < 1) throw Error(Errc::InvalidParameter, "n_paths must be >= 1");
}

}  // namespace

DetLimitReport deterministic_limit_experiment(double lambda_init, double alpha_hat, double beta_hat,
                                              const JumpFamily& jumps, const std::vector<double>& eps_list,
                                              double horizon, std::size_t n_paths, std::uint64_t seed,
                                              unsigned workers) {
  check_eps_list(eps_list, horizon, n_paths);
  if (!(alpha_hat >= 0.0 && beta_hat >= 0.0)) throw Error(Errc::InvalidParameter, "alpha_hat, beta_hat must be >= 0");
  validate_jumps(jumps);
  if (depends_on_intensity(jumps))
    throw Error(Errc::IntensityDependentJumps, "the deterministic limit needs intensity-independent jumps");

  DetLimitReport report{DetLimitMode::EpsScaling, horizon, n_paths, {}};
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    const double eps = eps_list[k];
    report.rows.push_back(run_eps(lambda_init, eps * alpha_hat, eps * beta_hat, jumps, eps, horizon, n_paths,
                                  level_seed(seed, k), workers));
  }
  return report;
}

DetLimitReport deterministic_limit_fixed_rho(double lambda_init, double alpha_hat, double beta_hat, double rho,
                                             double gamma_shape, const std::vector<double>& eps_list,
                                             double horizon, std::size_t n_paths, std::uint64_t seed,
                                             unsigned workers) {
  check_eps_list(eps_list, horizon, n_paths);
  if (!(alpha_hat >= 0.0 && beta_hat > 0.0)) throw Error(Errc::InvalidParameter, "fixed-rho mode needs beta_hat > 0");
  if (!(gamma_shape > 0.0)) throw Error(Errc::InvalidParameter, "gamma shape must be > 0");

  std::vector<JumpFamily> families;
  for (const double eps : eps_list) {
    const double target = rho + eps * alpha_hat;
    if (target < 0.0)
      throw Error(Errc::InfeasibleRhoTarget, "rho + eps alpha_hat = " + fmt(target) + " < 0 at eps = " + fmt(eps) +
                                                 " would need E[X] < 0");
    const double ex = target / (eps * beta_hat);
    if (ex == 0.0) {
      families.emplace_back(ConstantJumps{0.0});
    } else {
      families.emplace_back(GammaJumps{gamma_shape / ex, gamma_shape});
    }
  }

  DetLimitReport report{DetLimitMode::FixedRho, horizon, n_paths, {}};
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    const double eps = eps_list[k];
    report.rows.push_back(run_eps(lambda_init, eps * alpha_hat, eps * beta_hat, families[k], eps, horizon, n_paths,
                                  level_seed(seed, k), workers));
  }
  return report;
}

}  // namespace selfex
