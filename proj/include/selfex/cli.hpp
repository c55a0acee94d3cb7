#pragma once

#include "selfex/core_model.hpp"
#include "selfex/scaling_limit.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace selfex::cli {

enum class Command { Simulate, Moments, Limit, Detlimit };

std::optional<Command> parse_command(const std::string& name);
std::string to_string(Command command);

/// Flat `key = value` file; `#` starts a comment. Keys keep the line they came from.
class ConfigFile {
 public:
  struct Entry {
    std::string value;
    int line;
  };

  /// Throws Error{InvalidConfig} on malformed lines, duplicate or unknown keys.
  static ConfigFile parse(std::istream& in, const std::string& source);
  static ConfigFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  void set(const std::string& key, std::string value);

  std::string text(const std::string& key, const std::string& fallback) const;
  std::string text(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  double number(const std::string& key) const;
  std::uint64_t integer(const std::string& key, std::uint64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;

  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;
  std::string source_;
  std::map<std::string, Entry> entries_;
};

/// Every key the config format accepts.
const std::vector<std::string>& known_keys();

struct RunConfig {
  Command command = Command::Simulate;

  std::optional<ModelSpec> model;
  bool strict_support = false;

  double horizon = 1.0;
  double grid_dt = 0.1;
  std::size_t paths = 1000;
  std::uint64_t seed = 1;
  std::size_t max_jumps = 1'000'000;
  std::optional<double> bound_refresh;

  std::vector<double> v_list{0.5, 0.1, 0.02};
  double c0 = 1.0, c1 = 1.0, u = 1.0, t = 1.0;
  std::vector<InitialPolicy> policies{InitialPolicy::Vanishing, InitialPolicy::AtLevel};
  std::string claimed_limit = "family_limit";

  std::vector<double> eps_list{1.0, 0.1, 0.01};
  double alpha_hat = 0.5, beta_hat = 0.5;
  DetLimitMode detlimit_mode = DetLimitMode::EpsScaling;
  double detlimit_rho = 0.0;
  double detlimit_shape = 1.0;
  double lambda_init = 1.0;
  std::optional<JumpFamily> jumps;

  std::filesystem::path out_dir = "out";
  bool emit_paths = false;
  bool emit_svg = true;
};

struct Overrides {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
};

/// Builds and validates the run configuration for `command`. Every module
/// precondition that can be checked up front is checked here.
RunConfig make_run_config(Command command, ConfigFile file, const Overrides& overrides = {});

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitExplosion = 3;
inline constexpr int kExitCriterion = 4;

/// Runs one command and writes its files; returns the process exit code.
/// Diagnostics go to `err`, progress notes to `log`.
int run(const RunConfig& cfg, std::ostream& log, std::ostream& err);

/// Full entry point: parses argv, loads the config, runs. Never returns a
/// nonzero code other than 2, 3 or 4.
int main_entry(int argc, char** argv);

/// Shortest round-trip decimal form.
std::string format_number(double x);

}  // namespace selfex::cli
