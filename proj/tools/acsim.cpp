// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: compile workloads, run them on the simulated
// cluster, and reproduce the bundled experiments.
#include <cstdio>

#include <CLI11.hpp>

#include "acsim/config.hpp"
#include "acsim/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"acsim - cycle-approximate multi-accelerator cluster simulator"};
  app.require_subcommand(1);

  std::string config_path;
  auto* check = app.add_subcommand("check-config", "validate a cluster config");
  check->add_option("config", config_path, "config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (check->parsed()) {
      acsim::ClusterConfig config = acsim::load_and_validate(config_path);
      std::printf("ok: %zu cores, %zu accelerators, %llu bytes scratchpad\n",
                  config.control_cores.size(), config.accelerators.size(),
                  static_cast<unsigned long long>(config.spm.capacity_bytes()));
    }
  } catch (const acsim::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
