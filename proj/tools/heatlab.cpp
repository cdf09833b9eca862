// Copyright 2026 The heatlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "heatlab/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Two-point measurement heat-exchange experiments on coupled spin chains"};
  app.set_version_flag("--version", heatlab::kVersion);
  app.require_subcommand(1);

  heatlab::RunOptions options;
  std::uint64_t seed = 0;
  std::string out_dir;
  app.add_option("--threads", options.threads, "Worker threads for sampling")
      ->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "Sampling seed (overrides the config)");
  auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides the config)");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the protocol once and verify it");
  auto* scan = app.add_subcommand("scan", "Sweep the coupling or contact-time list");
  auto* verify = app.add_subcommand("verify", "Check commutation, reality and feasibility");
  for (auto* sub : {run, scan, verify}) {
    sub->add_option("config", config_path, "Experiment config (YAML)")->required();
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? heatlab::kExitOk : heatlab::kExitConfigError;
  }
  if (*seed_opt) options.seed = seed;
  if (*out_opt) options.out = out_dir;

  if (*run) return heatlab::cmd_run(config_path, options, std::cout, std::cerr);
  if (*scan) return heatlab::cmd_scan(config_path, options, std::cout, std::cerr);
  return heatlab::cmd_verify(config_path, options, std::cout, std::cerr);
}
