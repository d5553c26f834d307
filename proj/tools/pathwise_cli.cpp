#include "pathwise/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Pathwise solutions of evolution equations driven by fractional Brownian motion"};
  app.require_subcommand(1, 1);

  std::string config_file;
  std::uint64_t seed = 0;
  std::string out_dir;
  int grid_pow = 0;
  for (const char* name : {"sample-path", "integrate", "solve", "cocycle", "usc", "verify-all"}) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--config", config_file, "INI run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "64-bit seed (overrides the config)");
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--grid-pow", grid_pow, "use n = 2^k grid steps (overrides the config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pathwise::kExitConfig;
  }
  const CLI::App* sub = app.get_subcommands().front();

  pathwise::RunConfig cfg;
  try {
    if (!config_file.empty()) cfg = pathwise::load_config(config_file);
    cfg.experiment = sub->get_name();
    if (sub->count("--seed")) cfg.seed = seed;
    if (sub->count("--out")) cfg.out_dir = out_dir;
    if (sub->count("--grid-pow")) cfg.grid_pow = grid_pow;
    cfg.validate();
  } catch (const pathwise::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return pathwise::kExitConfig;
  }

  try {
    return pathwise::run(cfg, std::cerr);
  } catch (const pathwise::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return pathwise::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
