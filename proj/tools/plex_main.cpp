// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0
//
// plex: Lyapunov exponents of randomly driven 1-D parabolic problems.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "plex/run.hpp"
#include "plex/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"plex: principal Lyapunov exponents of random parabolic equations"};
  app.require_subcommand(1);
  // Global flags are accepted after the subcommand as well.
  app.fallthrough();

  std::string out_dir = ".";
  std::uint64_t seed = 0;
  unsigned threads = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Override sampling.seed from the config");
  app.add_option("--out-dir", out_dir, "Directory for trace.csv, report.json, validation.json");
  app.add_option("--threads", threads, "Worker threads for Monte-Carlo work (0: all cores)");
  seed_opt->configurable(false);

  std::string config;
  auto* run = app.add_subcommand("run", "Validate a scenario and run all estimators");
  run->add_option("config", config, "Scenario YAML file or preset name")->required();
  auto* validate = app.add_subcommand("validate", "Check the modelling assumptions only");
  validate->add_option("config", config, "Scenario YAML file or preset name")->required();
  auto* presets = app.add_subcommand("presets", "List shipped presets");
  std::string show_name;
  presets->add_option("--show", show_name, "Print the YAML of one preset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? plex::kExitOk : plex::kExitUsage;
  }

  plex::RunOptions opts;
  opts.out_dir = out_dir;
  opts.threads = threads;
  if (*seed_opt) opts.seed = seed;

  if (*presets) {
    if (!show_name.empty()) {
      try {
        std::cout << plex::preset_text(show_name);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return plex::kExitUsage;
      }
      return plex::kExitOk;
    }
    for (const auto& p : plex::list_presets()) std::cout << p.name << "  " << p.description << '\n';
    return plex::kExitOk;
  }
  if (*validate) return plex::validate_config(config, opts, std::cout, std::cerr);
  return plex::run_scenario(config, opts, std::cout, std::cerr);
}
