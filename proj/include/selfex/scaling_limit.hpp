#pragma once

#include "selfex/cir.hpp"
#include "selfex/core_model.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace selfex {

/// How lambda_k(0) is chosen for a scaled family.
enum class InitialPolicy {
  /// lambda_k(0) = v_k lambda_0k, so a_k lambda_k(0) -> 0.
  Vanishing,
  /// lambda_k(0) = lambda_0k.
  AtLevel,
};

std::string to_string(InitialPolicy policy);

struct ScalingLevel {
  double v;
  double a;
  double lambda0;
  double beta;
  /// a^2 beta^3 E[X^3], the first coefficient of the scaled generator beyond order two.
  double third_order;
  ModelSpec model;
};

struct LimitCandidate {
  std::string name;
  CirParams cir;
};

struct ScalingFamily {
  std::vector<ScalingLevel> levels;
  /// candidates.front() is the claimed limit; the rest are reported alongside.
  std::vector<LimitCandidate> candidates;
  InitialPolicy policy = InitialPolicy::Vanishing;

  const CirParams& claimed_limit() const { return candidates.front().cir; }
  /// True when every level has beta = 0.
  bool degenerate() const;
};

/// Gamma-jump family: a_k = 1/Gamma(v_k),
/// beta_k = sqrt(Gamma(v)/(v(1+v))), lambda_0k = c0 sqrt(Gamma(v)(1+v)/v),
/// drift rate beta_k E[X_k] + c1, jumps Gamma{u, v_k}.
/// Candidates, in order: family_limit {c0/u + c1 c0, c1, 1/u^2},
/// level_c0_over_u {c0/u, c1, 1/u^2}, printed_example {c0, c1/u, 1/u^2};
/// y0 is 0 under Vanishing and c0 under AtLevel.
ScalingFamily gamma_family(double c0, double c1, double u, const std::vector<double>& v_list,
                           InitialPolicy policy = InitialPolicy::Vanishing);

struct ConvergenceRow {
  double v;
  double a;
  std::string stat;
  std::string candidate;
  double empirical;
  double reference;
  double se;
  double abs_error;
};

struct CriterionCheck {
  std::string name;
  bool pass;
  /// Informational checks are reported but do not decide the verdict.
  bool informational;
  std::string detail;
};

struct ConvergenceReport {
  std::string quantity;
  InitialPolicy policy = InitialPolicy::Vanishing;
  double t = 0.0;
  std::size_t n_paths = 0;
  bool degenerate = false;
  std::vector<ConvergenceRow> rows;
  std::vector<CriterionCheck> checks;

  /// All non-informational checks pass.
  bool passed() const;
  /// Rows for one stat and candidate, in level order.
  std::vector<ConvergenceRow> series(const std::string& stat, const std::string& candidate) const;
  const CriterionCheck* check(const std::string& name) const;
};

/// Stat name as written to convergence.csv, e.g. "mean_lambda:vanishing:family_limit".
std::string stat_name(const ConvergenceReport& report, const ConvergenceRow& row);

/// Simulates every level to time t and compares a_k lambda_k(t) with the
/// candidates' CIR mean and variance, plus KS against cir_marginal when y0 = 0.
ConvergenceReport convergence_experiment_intensity(const ScalingFamily& family, double t, std::size_t n_paths,
                                                   std::uint64_t seed, unsigned workers = 0);

/// Same for a_k Lambda_k(t) against y_{1,0}(t) and y_{2,0}(t).
ConvergenceReport convergence_experiment_integrated(const ScalingFamily& family, double t, std::size_t n_paths,
                                                    std::uint64_t seed, unsigned workers = 0);

struct DetLimitRow {
  double eps;
  double rho_eps;
  double chi2;
  int dof;
  double pvalue;
  double mean_N;
  double mean_ref;
};

enum class DetLimitMode { EpsScaling, FixedRho };

struct DetLimitReport {
  DetLimitMode mode = DetLimitMode::EpsScaling;
  double horizon = 0.0;
  std::size_t n_paths = 0;
  std::vector<DetLimitRow> rows;
};

/// For each eps runs the linear model alpha = eps alpha_hat, beta = eps beta_hat,
/// lambda0 = lambda_init, and tests N(horizon) against Poisson with mean
/// int_0^T lambda_init e^{rho_eps s} ds.
DetLimitReport deterministic_limit_experiment(double lambda_init, double alpha_hat, double beta_hat,
                                              const JumpFamily& jumps, const std::vector<double>& eps_list,
                                              double horizon, std::size_t n_paths, std::uint64_t seed,
                                              unsigned workers = 0);

/// Holds rho fixed by rescaling E[X] = (rho + eps alpha_hat) / (eps beta_hat)
/// with gamma jumps of the given shape. Throws Error{InfeasibleRhoTarget}
/// when rho + eps alpha_hat < 0.
DetLimitReport deterministic_limit_fixed_rho(double lambda_init, double alpha_hat, double beta_hat, double rho,
                                             double gamma_shape, const std::vector<double>& eps_list,
                                             double horizon, std::size_t n_paths, std::uint64_t seed,
                                             unsigned workers = 0);

}  // namespace selfex
