#include "selfex/cli.hpp"

#include "selfex/error.hpp"
#include "selfex/thinning.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace selfex::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> to_double(const std::string& s) {
  double x = 0.0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, x);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return x;
}

}  // namespace

std::optional<Command> parse_command(const std::string& name) {
  if (name == "simulate") return Command::Simulate;
  if (name == "moments") return Command::Moments;
  if (name == "limit") return Command::Limit;
  if (name == "detlimit") return Command::Detlimit;
  return std::nullopt;
}

std::string to_string(Command command) {
  switch (command) {
    case Command::Simulate: return "simulate";
    case Command::Moments: return "moments";
    case Command::Limit: return "limit";
    case Command::Detlimit: return "detlimit";
  }
  return "unknown";
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "drift.kind", "drift.alpha", "drift.delta", "drift.gamma", "drift.lambda0", "beta",
      "jumps.kind", "jumps.u", "jumps.v", "jumps.mean", "jumps.shape", "jumps.c",
      "jumps.coupling", "jumps.base", "lambda_init", "strict_support",
      "horizon", "grid_dt", "paths", "seed", "max_jumps", "bound_refresh",
      "v_list", "c0", "c1", "u", "t", "initial_policy", "claimed_limit",
      "eps_list", "alpha_hat", "beta_hat", "detlimit.mode", "detlimit.rho", "detlimit.shape",
      "out_dir", "emit_paths", "emit_svg"};
  return keys;
}

ConfigFile ConfigFile::parse(std::istream& in, const std::string& source) {
  ConfigFile cfg;
  cfg.source_ = source;
  const auto& keys = known_keys();
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = source + ":" + std::to_string(line) + ": ";
    if (eq == std::string::npos) throw Error(Errc::InvalidConfig, where + "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) throw Error(Errc::InvalidConfig, where + "missing key");
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw Error(Errc::InvalidConfig, where + "unknown key '" + key + "'");
    if (cfg.entries_.count(key)) throw Error(Errc::InvalidConfig, where + "duplicate key '" + key + "'");
    cfg.entries_[key] = {value, line};
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::InvalidConfig, "cannot open config file '" + path.string() + "'");
  return parse(in, path.string());
}

void ConfigFile::set(const std::string& key, std::string value) { entries_[key] = {std::move(value), 0}; }

void ConfigFile::fail(const std::string& key, const std::string& message) const {
  const auto it = entries_.find(key);
  std::string where = source_;
  if (it != entries_.end() && it->second.line > 0) where += ":" + std::to_string(it->second.line);
  throw Error(Errc::InvalidConfig, where + ": key '" + key + "': " + message);
}

std::string ConfigFile::text(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second.value;
}

std::string ConfigFile::text(const std::string& key) const {
  if (!has(key)) fail(key, "required but missing");
  return entries_.at(key).value;
}

double ConfigFile::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

double ConfigFile::number(const std::string& key) const {
  const auto v = to_double(text(key));
  if (!v) fail(key, "expected a number, got '" + text(key) + "'");
  return *v;
}

std::uint64_t ConfigFile::integer(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string s = text(key);
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(key, "expected a non-negative integer, got '" + s + "'");
  return x;
}

bool ConfigFile::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string s = text(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail(key, "expected true or false, got '" + s + "'");
}

std::vector<double> ConfigFile::numbers(const std::string& key, const std::vector<double>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  std::stringstream ss(text(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = to_double(trim(item));
    if (!v) fail(key, "expected a comma-separated list of numbers");
    out.push_back(*v);
  }
  if (out.empty()) fail(key, "list is empty");
  return out;
}

namespace {

BaseJumpFamily base_family(const ConfigFile& f, const std::string& kind, const std::string& kind_key) {
  if (kind == "gamma") return GammaJumps{f.number("jumps.u"), f.number("jumps.v")};
  if (kind == "inverse_gaussian") return InverseGaussianJumps{f.number("jumps.mean"), f.number("jumps.shape")};
  if (kind == "constant") return ConstantJumps{f.number("jumps.c")};
  throw Error(Errc::InvalidConfig, "key '" + kind_key + "': unknown jump family '" + kind +
                                       "' (gamma, inverse_gaussian, constant, shifted)");
}

JumpFamily jump_family(const ConfigFile& f) {
  const std::string kind = f.text("jumps.kind");
  JumpFamily family;
  if (kind == "shifted") {
    family = IntensityShiftedJumps{base_family(f, f.text("jumps.base"), "jumps.base"), f.number("jumps.coupling")};
  } else {
    family = std::visit([](const auto& b) -> JumpFamily { return b; }, base_family(f, kind, "jumps.kind"));
  }
  validate_jumps(family);
  return family;
}

ModelSpec model_spec(const ConfigFile& f) {
  const std::string kind = f.text("drift.kind");
  DriftSpec drift;
  if (kind == "linear") {
    drift = LinearDrift{f.number("drift.alpha"), f.number("drift.lambda0")};
  } else if (kind == "nonlinear") {
    drift = NonlinearDrift{f.number("drift.alpha"), f.number("drift.delta"), f.number("drift.gamma"),
                           f.number("drift.lambda0")};
  } else {
    throw Error(Errc::InvalidConfig, "key 'drift.kind': expected linear or nonlinear, got '" + kind + "'");
  }
  return ModelSpec{drift, f.number("beta"), jump_family(f), f.number("lambda_init")};
}

}  // namespace

RunConfig make_run_config(Command command, ConfigFile f, const Overrides& overrides) {
  RunConfig cfg;
  cfg.command = command;
  if (overrides.out_dir) f.set("out_dir", overrides.out_dir->string());
  if (overrides.seed) f.set("seed", std::to_string(*overrides.seed));
  if (overrides.paths) f.set("paths", std::to_string(*overrides.paths));

  cfg.horizon = f.number("horizon", cfg.horizon);
  cfg.grid_dt = f.number("grid_dt", cfg.grid_dt);
  cfg.paths = f.integer("paths", cfg.paths);
  cfg.seed = f.integer("seed", cfg.seed);
  cfg.max_jumps = f.integer("max_jumps", cfg.max_jumps);
  if (f.has("bound_refresh")) cfg.bound_refresh = f.number("bound_refresh");
  cfg.strict_support = f.flag("strict_support", false);
  cfg.out_dir = f.text("out_dir", cfg.out_dir.string());
  cfg.emit_paths = f.flag("emit_paths", cfg.emit_paths);
  cfg.emit_svg = f.flag("emit_svg", cfg.emit_svg);
  if (cfg.paths < 1) throw Error(Errc::InvalidConfig, "key 'paths': must be >= 1");

  switch (command) {
    case Command::Simulate:
    case Command::Moments: {
      cfg.model = model_spec(f);
      const ValidatedModel model = validate_model(*cfg.model, {cfg.strict_support});
      SimConfig sim = SimConfig::defaults_for(model, cfg.horizon, cfg.grid_dt);
      sim.max_jumps = cfg.max_jumps;
      if (cfg.bound_refresh) sim.bound_refresh = *cfg.bound_refresh;
      sim.validate();
      if (command == Command::Moments) classify_regime(*cfg.model);
      break;
    }
    case Command::Limit: {
      cfg.v_list = f.numbers("v_list", cfg.v_list);
      cfg.c0 = f.number("c0", cfg.c0);
      cfg.c1 = f.number("c1", cfg.c1);
      cfg.u = f.number("u", cfg.u);
      cfg.t = f.number("t", cfg.t);
      const std::string policy = f.text("initial_policy", "both");
      if (policy == "both") {
        cfg.policies = {InitialPolicy::Vanishing, InitialPolicy::AtLevel};
      } else if (policy == "vanishing") {
        cfg.policies = {InitialPolicy::Vanishing};
      } else if (policy == "at_level") {
        cfg.policies = {InitialPolicy::AtLevel};
      } else {
        throw Error(Errc::InvalidConfig, "key 'initial_policy': expected vanishing, at_level or both");
      }
      cfg.claimed_limit = f.text("claimed_limit", cfg.claimed_limit);
      const ScalingFamily family = gamma_family(cfg.c0, cfg.c1, cfg.u, cfg.v_list);
      const bool known = std::any_of(family.candidates.begin(), family.candidates.end(),
                                     [&](const LimitCandidate& c) { return c.name == cfg.claimed_limit; });
      if (!known)
        throw Error(Errc::InvalidConfig, "key 'claimed_limit': expected family_limit, level_c0_over_u or "
                                         "printed_example");
      if (!(cfg.t >= 0.0)) throw Error(Errc::InvalidConfig, "key 't': must be >= 0");
      if (cfg.paths < 2) throw Error(Errc::InvalidConfig, "key 'paths': the limit experiment needs >= 2");
      break;
    }
    case Command::Detlimit: {
      cfg.lambda_init = f.number("lambda_init", cfg.lambda_init);
      cfg.alpha_hat = f.number("alpha_hat", cfg.alpha_hat);
      cfg.beta_hat = f.number("beta_hat", cfg.beta_hat);
      cfg.eps_list = f.numbers("eps_list", cfg.eps_list);
      const std::string mode = f.text("detlimit.mode", "eps_scaling");
      if (mode == "eps_scaling") {
        cfg.detlimit_mode = DetLimitMode::EpsScaling;
      } else if (mode == "fixed_rho") {
        cfg.detlimit_mode = DetLimitMode::FixedRho;
      } else {
        throw Error(Errc::InvalidConfig, "key 'detlimit.mode': expected eps_scaling or fixed_rho");
      }
      cfg.detlimit_rho = f.number("detlimit.rho", cfg.detlimit_rho);
      cfg.detlimit_shape = f.number("detlimit.shape", cfg.detlimit_shape);
      cfg.jumps = f.has("jumps.kind") ? jump_family(f) : JumpFamily{GammaJumps{1.0, 1.0}};
      if (!(cfg.lambda_init > 0.0)) throw Error(Errc::NonPositiveInitialIntensity, "lambda_init must be > 0");
      if (!(cfg.horizon > 0.0)) throw Error(Errc::InvalidConfig, "key 'horizon': must be > 0");
      for (std::size_t k = 0; k < cfg.eps_list.size(); ++k) {
        if (!(cfg.eps_list[k] > 0.0) || (k > 0 && !(cfg.eps_list[k] < cfg.eps_list[k - 1])))
          throw Error(Errc::InvalidConfig, "key 'eps_list': must be positive and strictly decreasing");
        if (cfg.detlimit_mode == DetLimitMode::FixedRho && cfg.detlimit_rho + cfg.eps_list[k] * cfg.alpha_hat < 0.0)
          throw Error(Errc::InfeasibleRhoTarget, "rho + eps alpha_hat < 0 at eps = " +
                                                     format_number(cfg.eps_list[k]) + " would need E[X] < 0");
      }
      break;
    }
  }
  return cfg;
}

}  // namespace selfex::cli
