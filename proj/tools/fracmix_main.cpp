#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fracmix/commands.hpp"

int main(int argc, char** argv) {
  using namespace fracmix;
  CLI::App app{"Concave-convex fractional problems with mixed exterior data"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON configuration file");
  auto* out_opt = app.add_option("--out", out_dir, "Output directory");
  auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides the config)");
  app.add_flag("--quiet", quiet, "Only report errors");

  struct Entry {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&, const CliOverrides&, std::ostream&);
  };
  const Entry entries[] = {
      {"solve", "Minimal solutions along the lambda grid", cmd_solve},
      {"bracket", "Numerical bracket of the extremal parameter", cmd_bracket},
      {"second", "Mountain-pass second solutions", cmd_second},
      {"verify", "Randomized property checks", cmd_verify},
      {"export", "Dump the discretization and operator", cmd_export},
  };
  for (const Entry& e : entries) {
    app.add_subcommand(e.name, e.help)->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  RunConfig config;
  try {
    if (!config_path.empty()) config = load_config(config_path);
  } catch (const ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return exit_config;
  }
  CliOverrides cli;
  if (out_opt->count()) cli.out = out_dir;
  if (seed_opt->count()) cli.seed = seed;
  cli.quiet = quiet;

  for (const Entry& e : entries) {
    if (app.got_subcommand(e.name)) return e.run(config, cli, std::cerr);
  }
  return exit_config;
}
