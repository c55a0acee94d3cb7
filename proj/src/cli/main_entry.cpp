#include "selfex/cli.hpp"

#include "selfex/error.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace selfex::cli {

int main_entry(int argc, char** argv) {
  CLI::App app{"Simulation and moment analysis for self-exciting jump processes", "selfex"};
  std::string command_name;
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  app.add_option("command", command_name, "simulate | moments | limit | detlimit")
      ->required()
      ->check(CLI::IsMember({"simulate", "moments", "limit", "detlimit"}));
  app.add_option("--config", config_path, "flat key = value config file")->required();
  app.add_option("--out", out_dir, "output directory (overrides out_dir)");
  app.add_option("--seed", seed, "master seed (overrides seed)");
  app.add_option("--paths", paths, "number of paths (overrides paths)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    Overrides overrides;
    if (out_dir) overrides.out_dir = *out_dir;
    overrides.seed = seed;
    overrides.paths = paths;
    const RunConfig cfg = make_run_config(*parse_command(command_name), ConfigFile::load(config_path), overrides);
    return run(cfg, std::cout, std::cerr);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::ExplosionBudgetExceeded ? kExitExplosion : kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace selfex::cli
