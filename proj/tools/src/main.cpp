#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace levymax::cli;
  CLI::App app{"levymax: Monte Carlo checks of maximal inequalities and Ito formulas for Poisson integrals, "
               "and a stochastic quasi-geostrophic solver"};
  app.set_version_flag("--version", LEVYMAX_VERSION);
  app.require_subcommand(1);

  RunOptions options;
  std::uint64_t seed = 0;
  std::string out_dir;
  unsigned jobs = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out-dir", out_dir, std::string("output directory (default: $") + kOutputRootEnv +
                                              "/<kind>-<hash> or ./levymax-runs/<kind>-<hash>)");
    sub->add_option("--jobs", jobs, "worker threads (0 = all cores); results do not depend on it");
  };

  std::string config;
  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("config", config, "YAML experiment config")->required();
  add_common(run);

  std::vector<std::string> grids;
  auto* sweep = app.add_subcommand("sweep", "run an experiment over a parameter grid");
  sweep->add_option("config", config, "YAML experiment config")->required();
  sweep->add_option("--grid", grids, "key=v1,v2,... with key in p, scale, lambda, radius, n_steps, dt")->required();
  add_common(sweep);

  std::string kind;
  auto* describe = app.add_subcommand("describe", "print what an experiment kind checks");
  describe->add_option("kind", kind, "experiment kind")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  for (auto* sub : {run, sweep}) {
    if (sub->count("--seed")) options.seed = seed;
    if (sub->count("--out-dir")) options.out_dir = out_dir;
    if (sub->count("--jobs")) options.jobs = jobs;
  }
  if (*run) return run_command(config, options, std::cout, std::cerr);
  if (*sweep) return sweep_command(config, grids, options, std::cout, std::cerr);
  return describe_command(kind, std::cout, std::cerr);
}
