#include "selfex/cli.hpp"

#include "selfex/ensemble.hpp"
#include "selfex/error.hpp"
#include "selfex/linear_moments.hpp"
#include "selfex/thinning.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

namespace selfex::cli {

using nlohmann::json;

std::string format_number(double x) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) return "nan";
  return std::string(buf.data(), ptr);
}

namespace {

constexpr double kClosedFormTolerance = 1e-6;
constexpr double kDetLimitLevel = 0.01;

void write_atomic(const std::filesystem::path& dir, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(dir);
  const auto target = dir / name;
  const auto tmp = dir / (name + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::InvalidConfig, "cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error(Errc::InvalidConfig, "write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, target);
}

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) { row(header); }

  Csv& cell(double x) { return raw(format_number(x)); }
  Csv& cell(std::size_t x) { return raw(std::to_string(x)); }
  Csv& cell(int x) { return raw(std::to_string(x)); }
  Csv& cell(const std::string& s) { return raw(s); }
  Csv& empty() { return raw(""); }
  void end() {
    text_ += '\n';
    fresh_ = true;
  }
  const std::string& str() const { return text_; }

 private:
  void row(const std::vector<std::string>& cells) {
    for (const auto& c : cells) raw(c);
    end();
  }
  Csv& raw(const std::string& s) {
    if (!fresh_) text_ += ',';
    text_ += s;
    fresh_ = false;
    return *this;
  }
  std::string text_;
  bool fresh_ = true;
};

json regime_json(const ModelSpec& spec) {
  try {
    const Regime r = classify_regime(spec);
    json j{{"rho", r.rho}, {"class", to_string(r.cls)}};
    j["mean_limit"] = r.mean_limit ? json(*r.mean_limit) : json(nullptr);
    return j;
  } catch (const Error& e) {
    return json{{"class", "unclassified"}, {"reason", e.what()}};
  }
}

json drift_json(const DriftSpec& drift) {
  return std::visit(
      [](const auto& d) -> json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, LinearDrift>) {
          return {{"kind", "linear"}, {"alpha", d.alpha}, {"lambda0", d.lambda0}};
        } else {
          return {{"kind", "nonlinear"}, {"alpha", d.alpha}, {"delta", d.delta}, {"gamma", d.gamma},
                  {"lambda0", d.lambda0}};
        }
      },
      drift);
}

json model_json(const ModelSpec& spec) {
  return {{"drift", drift_json(spec.drift)},
          {"beta", spec.beta},
          {"jumps", describe(spec.jumps)},
          {"lambda_init", spec.lambda_init}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

SimConfig sim_config(const RunConfig& cfg, const ValidatedModel& model, double horizon, double grid_dt) {
  SimConfig sim = SimConfig::defaults_for(model, horizon, grid_dt);
  sim.max_jumps = cfg.max_jumps;
  if (cfg.bound_refresh) sim.bound_refresh = *cfg.bound_refresh;
  sim.validate();
  return sim;
}

// Two-panel polyline plot: lambda(t) on top, U(t) below.
std::string paths_svg(const std::vector<const Path*>& paths) {
  constexpr double width = 800, panel = 260, margin = 40;
  const std::array<const char*, 4> colors{"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  double horizon = 0, lambda_max = 0, u_max = 0;
  for (const Path* p : paths) {
    horizon = std::max(horizon, p->horizon);
    for (const auto& g : p->grid) {
      lambda_max = std::max(lambda_max, g.lambda);
      u_max = std::max(u_max, g.jumps_sum);
    }
    for (const double l : p->lambda_post) lambda_max = std::max(lambda_max, l);
  }
  lambda_max = lambda_max > 0 ? lambda_max : 1;
  u_max = u_max > 0 ? u_max : 1;
  auto x_of = [&](double t) { return margin + (width - 2 * margin) * t / horizon; };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\">\n";
  svg += "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
  for (int panel_index = 0; panel_index < 2; ++panel_index) {
    const double top = margin + panel_index * (panel + margin);
    svg += "<rect x=\"" + format_number(margin) + "\" y=\"" + format_number(top) + "\" width=\"" +
           format_number(width - 2 * margin) + "\" height=\"" + format_number(panel) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + format_number(margin) + "\" y=\"" + format_number(top - 8) + "\" font-size=\"14\">" +
           (panel_index == 0 ? "lambda(t)" : "U(t)") + "</text>\n";
    const double scale = panel_index == 0 ? lambda_max : u_max;
    auto y_of = [&](double v) { return top + panel * (1.0 - v / scale); };
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const Path& p = *paths[i];
      // Merge grid rows and jump points in time order.
      std::vector<std::pair<double, double>> pts;
      std::size_t g = 0;
      double u = 0;
      for (std::size_t k = 0; k <= p.jump_times.size(); ++k) {
        const double tk = k < p.jump_times.size() ? p.jump_times[k] : p.horizon + 1;
        while (g < p.grid.size() && p.grid[g].t < tk) {
          pts.emplace_back(p.grid[g].t, panel_index == 0 ? p.grid[g].lambda : p.grid[g].jumps_sum);
          ++g;
        }
        if (k == p.jump_times.size()) break;
        if (panel_index == 0) {
          pts.emplace_back(tk, p.lambda_pre[k]);
          pts.emplace_back(tk, p.lambda_post[k]);
        } else {
          pts.emplace_back(tk, u);
          u += p.marks[k];
          pts.emplace_back(tk, u);
        }
      }
      svg += "<polyline fill=\"none\" stroke-width=\"1\" stroke=\"" + std::string(colors[i % colors.size()]) +
             "\" points=\"";
      for (std::size_t j = 0; j < pts.size(); ++j) {
        if (j) svg += ' ';
        svg += format_number(std::round(x_of(pts[j].first) * 100) / 100) + "," +
               format_number(std::round(y_of(pts[j].second) * 100) / 100);
      }
      svg += "\"/>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

int run_simulate(const RunConfig& cfg, std::ostream& log) {
  const ValidatedModel model = validate_model(*cfg.model, {cfg.strict_support});
  const SimConfig sim = sim_config(cfg, model, cfg.horizon, cfg.grid_dt);

  std::vector<Path> kept;
  const EnsembleSummary summary =
      simulate_ensemble(model, sim, cfg.paths, cfg.seed, 0, cfg.emit_paths ? &kept : nullptr);
  if (!cfg.emit_paths) {
    const std::size_t n = std::min<std::size_t>(cfg.paths, 2);
    for (std::size_t i = 0; i < n; ++i) {
      RandomStream rng(cfg.seed, i);
      kept.push_back(simulate_path(model, sim, rng));
    }
  }
  const std::size_t emitted = cfg.emit_paths ? kept.size() : 1;

  Csv jumps({"path_id", "k", "T_k", "X_k", "lambda_pre", "lambda_post"});
  Csv grid({"path_id", "t", "lambda", "N", "U", "Lambda"});
  for (std::size_t i = 0; i < emitted; ++i) {
    const Path& p = kept[i];
    for (std::size_t k = 0; k < p.jump_times.size(); ++k) {
      jumps.cell(i).cell(k + 1).cell(p.jump_times[k]).cell(p.marks[k]).cell(p.lambda_pre[k]).cell(p.lambda_post[k]);
      jumps.end();
    }
    for (const auto& g : p.grid) {
      grid.cell(i).cell(g.t).cell(g.lambda).cell(g.count).cell(g.jumps_sum).cell(g.compensator);
      grid.end();
    }
  }

  json s{{"command", "simulate"},
         {"seed", cfg.seed},
         {"n_paths", cfg.paths},
         {"horizon", sim.horizon},
         {"grid_dt", sim.grid_dt},
         {"max_jumps", sim.max_jumps},
         {"bound_refresh", sim.bound_refresh},
         {"paths_emitted", emitted},
         {"model", model_json(*cfg.model)},
         {"regime", regime_json(*cfg.model)},
         {"ensemble", to_json(summary)}};

  write_atomic(cfg.out_dir, "jumps.csv", jumps.str());
  write_atomic(cfg.out_dir, "grid.csv", grid.str());
  write_atomic(cfg.out_dir, "summary.json", dump(s));
  if (cfg.emit_svg) {
    std::vector<const Path*> shown;
    for (std::size_t i = 0; i < std::min<std::size_t>(kept.size(), 2); ++i) shown.push_back(&kept[i]);
    write_atomic(cfg.out_dir, "paths.svg", paths_svg(shown));
  }
  log << "simulate: " << cfg.paths << " paths written to " << cfg.out_dir.string() << "\n";
  return kExitOk;
}

int run_moments(const RunConfig& cfg, std::ostream& log) {
  validate_model(*cfg.model, {cfg.strict_support});
  const LinearMomentParams p = LinearMomentParams::from_model(*cfg.model, 2);
  SimConfig grid_cfg;
  grid_cfg.horizon = cfg.horizon;
  grid_cfg.grid_dt = cfg.grid_dt;
  grid_cfg.validate();
  const std::vector<double> times = grid_cfg.grid_times();
  const Eigen::MatrixXd ode = moment_ode_system(p, 2, times);

  Csv csv({"t", "m1", "v", "var", "E_Lambda", "E_Lambda2_quadrature", "E_Lambda2_closedform"});
  json rows = json::array();
  double max_rel = 0.0, ode_mean = 0.0, ode_second = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    const double m = mean_intensity(p, t);
    const double v = second_moment_intensity(p, t);
    const double quad = second_moment_integrated(p, t, IntegratedMethod::Quadrature);
    csv.cell(t).cell(m).cell(v).cell(variance_intensity(p, t)).cell(mean_integrated(p, t)).cell(quad);
    ode_mean = std::max(ode_mean, std::abs(ode(i, 0) - m) / std::max(std::abs(m), 1e-300));
    ode_second = std::max(ode_second, std::abs(ode(i, 1) - v) / std::max(std::abs(v), 1e-300));
    if (p.critical) {
      csv.empty();
    } else {
      const double closed = second_moment_integrated(p, t, IntegratedMethod::ClosedForm);
      csv.cell(closed);
      const double rel = t > 0 ? std::abs(closed - quad) / std::max(std::abs(quad), 1e-300) : 0.0;
      max_rel = std::max(max_rel, rel);
      rows.push_back({{"t", t}, {"closed_form", closed}, {"quadrature", quad}, {"rel_diff", rel}});
    }
    csv.end();
  }

  json constants{{"rho", p.rho}, {"A", p.a}, {"critical", p.critical}};
  json discrepancy;
  if (p.critical) {
    discrepancy = {{"available", false}, {"reason", "rho = 0: closed form not defined, quadrature only"}};
  } else {
    constants.update({{"m0", p.m0}, {"m1", p.m1}, {"v0", p.v0}, {"v1", p.v1}, {"v2", p.v2},
                      {"phi0", p.phi0}, {"phi1", p.phi1}, {"phi2", p.phi2}, {"k0", p.k0}, {"k1", p.k1},
                      {"k2", p.k2}, {"C0", p.c0}, {"C1", p.c1}, {"C2", p.c2}});
    const double k1_rederived = (2.0 * p.m0 * (p.m0 - p.m1) - 2.0 * p.v0) / p.rho;
    discrepancy = {{"available", true},
                   {"tolerance", kClosedFormTolerance},
                   {"max_rel_diff", max_rel},
                   {"finding", max_rel > kClosedFormTolerance},
                   {"k1_used", p.k1},
                   {"k1_rederived", k1_rederived},
                   {"rows", rows}};
  }
  json s{{"command", "moments"},
         {"model", model_json(*cfg.model)},
         {"regime", regime_json(*cfg.model)},
         {"constants", constants},
         {"closed_form_vs_quadrature", discrepancy},
         {"ode_check", {{"max_rel_diff_m", ode_mean}, {"max_rel_diff_v", ode_second}}}};

  write_atomic(cfg.out_dir, "moments.csv", csv.str());
  write_atomic(cfg.out_dir, "summary.json", dump(s));
  log << "moments: " << times.size() << " rows written to " << cfg.out_dir.string() << "\n";
  if (!p.critical && max_rel > kClosedFormTolerance)
    log << "moments: closed-form E[Lambda^2] differs from quadrature by " << format_number(max_rel)
        << " (relative); see summary.json\n";
  return kExitOk;
}

json report_json(const ConvergenceReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name}, {"result", c.pass ? "PASS" : "FAIL"}, {"informational", c.informational},
                      {"detail", c.detail}});
  return {{"quantity", r.quantity}, {"policy", to_string(r.policy)}, {"degenerate", r.degenerate},
          {"passed", r.passed()}, {"checks", checks}};
}

int run_limit(const RunConfig& cfg, std::ostream& log) {
  Csv csv({"v_k", "a_k", "stat_name", "empirical", "reference", "se", "abs_error"});
  json reports = json::array(), criteria = json::object(), diagnostics = json::object(), family_json;
  bool all_pass = true;

  for (const InitialPolicy policy : cfg.policies) {
    ScalingFamily family = gamma_family(cfg.c0, cfg.c1, cfg.u, cfg.v_list, policy);
    std::stable_partition(family.candidates.begin(), family.candidates.end(),
                          [&](const LimitCandidate& c) { return c.name == cfg.claimed_limit; });
    if (family_json.is_null()) {
      family_json = json::array();
      for (const auto& l : family.levels)
        family_json.push_back({{"v", l.v}, {"a", l.a}, {"lambda0", l.lambda0}, {"beta", l.beta},
                               {"third_order", l.third_order}});
    }
    for (const bool integrated : {false, true}) {
      const ConvergenceReport report =
          integrated ? convergence_experiment_integrated(family, cfg.t, cfg.paths, cfg.seed)
                     : convergence_experiment_intensity(family, cfg.t, cfg.paths, cfg.seed);
      for (const auto& row : report.rows) {
        csv.cell(row.v).cell(row.a).cell(stat_name(report, row)).cell(row.empirical).cell(row.reference);
        csv.cell(row.se).cell(row.abs_error).end();
      }
      for (const auto& c : report.checks) {
        const std::string key = to_string(policy) + ":" + report.quantity + ":" + c.name;
        (c.informational ? diagnostics : criteria)[key] = c.pass ? "PASS" : "FAIL";
        if (!c.informational && !c.pass) {
          all_pass = false;
          log << "limit: FAIL " << key << " (" << c.detail << ")\n";
        }
      }
      json rj = report_json(report);
      json cands = json::array();
      for (const auto& c : family.candidates)
        cands.push_back({{"name", c.name}, {"c0", c.cir.c0}, {"c1", c.cir.c1}, {"c2", c.cir.c2}, {"y0", c.cir.y0}});
      rj["candidates"] = cands;
      rj["claimed_limit"] = family.candidates.front().name;
      reports.push_back(rj);
    }
  }

  json s{{"command", "limit"},
         {"seed", cfg.seed},
         {"n_paths", cfg.paths},
         {"t", cfg.t},
         {"c0", cfg.c0},
         {"c1", cfg.c1},
         {"u", cfg.u},
         {"family", family_json},
         {"reports", reports},
         {"criteria", criteria},
         {"diagnostics", diagnostics},
         {"verdict", all_pass ? "PASS" : "FAIL"}};
  write_atomic(cfg.out_dir, "convergence.csv", csv.str());
  write_atomic(cfg.out_dir, "summary.json", dump(s));
  log << "limit: verdict " << (all_pass ? "PASS" : "FAIL") << "\n";
  return all_pass ? kExitOk : kExitCriterion;
}

int run_detlimit(const RunConfig& cfg, std::ostream& log, std::ostream& err) {
  const bool fixed = cfg.detlimit_mode == DetLimitMode::FixedRho;
  if (fixed)
    err << "WARNING: fixed-rho mode rescales E[X] = (rho + eps alpha_hat) / (eps beta_hat); this needs "
           "rho + eps alpha_hat >= 0 and convergence is reported as a diagnostic only\n";
  const DetLimitReport report =
      fixed ? deterministic_limit_fixed_rho(cfg.lambda_init, cfg.alpha_hat, cfg.beta_hat, cfg.detlimit_rho,
                                            cfg.detlimit_shape, cfg.eps_list, cfg.horizon, cfg.paths, cfg.seed)
            : deterministic_limit_experiment(cfg.lambda_init, cfg.alpha_hat, cfg.beta_hat, *cfg.jumps, cfg.eps_list,
                                             cfg.horizon, cfg.paths, cfg.seed);

  Csv csv({"eps", "rho_eps", "chi2", "dof", "pvalue", "mean_N", "mean_ref"});
  json rows = json::array();
  for (const auto& r : report.rows) {
    csv.cell(r.eps).cell(r.rho_eps).cell(r.chi2).cell(r.dof).cell(r.pvalue).cell(r.mean_N).cell(r.mean_ref).end();
    rows.push_back({{"eps", r.eps}, {"pvalue", r.pvalue}, {"result", r.pvalue >= kDetLimitLevel ? "PASS" : "FAIL"}});
  }
  const bool final_ok = report.rows.back().pvalue >= kDetLimitLevel;
  json s{{"command", "detlimit"},
         {"mode", fixed ? "fixed_rho" : "eps_scaling"},
         {"seed", cfg.seed},
         {"n_paths", cfg.paths},
         {"horizon", cfg.horizon},
         {"lambda_init", cfg.lambda_init},
         {"alpha_hat", cfg.alpha_hat},
         {"beta_hat", cfg.beta_hat},
         {"level", kDetLimitLevel},
         {"rows", rows}};
  if (fixed) {
    s["jumps"] = "gamma(shape=" + format_number(cfg.detlimit_shape) + ", mean rescaled per eps)";
    s["rho"] = cfg.detlimit_rho;
    s["warning"] = "fixed-rho mode needs rho + eps alpha_hat >= 0; diagnostics only";
  } else {
    s["jumps"] = describe(*cfg.jumps);
    s["criteria"] = {{"final_eps_not_rejected", final_ok ? "PASS" : "FAIL"}};
    s["verdict"] = final_ok ? "PASS" : "FAIL";
  }
  write_atomic(cfg.out_dir, "detlimit.csv", csv.str());
  write_atomic(cfg.out_dir, "summary.json", dump(s));
  log << "detlimit: " << report.rows.size() << " rows, final p-value " << format_number(report.rows.back().pvalue)
      << "\n";
  return fixed || final_ok ? kExitOk : kExitCriterion;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& log, std::ostream& err) {
  try {
    switch (cfg.command) {
      case Command::Simulate: return run_simulate(cfg, log);
      case Command::Moments: return run_moments(cfg, log);
      case Command::Limit: return run_limit(cfg, log);
      case Command::Detlimit: return run_detlimit(cfg, log, err);
    }
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what();
    if (e.path_index()) err << " (path index " << *e.path_index() << ")";
    err << "\n";
    return e.code() == Errc::ExplosionBudgetExceeded ? kExitExplosion : kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace selfex::cli
