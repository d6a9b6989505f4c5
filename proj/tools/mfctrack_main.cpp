// Copyright 2026 The mfc-pathtrack Authors
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

#include <iostream>

#include "CLI11.hpp"
#include "mfc/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Model-free path tracking simulator"};
  app.require_subcommand(1);

  mfc::CommandOptions opts;
  std::string scenario;
  std::string out;
  std::uint64_t seed = 0;

  const auto add_common = [&](CLI::App* sub, bool scenario_required) {
    auto* s = sub->add_option("--scenario", scenario, "Scenario JSON file");
    if (scenario_required) s->required();
    s->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "Noise seed (overrides the scenario)");
  };

  auto* run = app.add_subcommand("run", "Closed loop in one process");
  add_common(run, true);
  auto* serve = app.add_subcommand("serve", "Plant side of a split run");
  add_common(serve, true);
  auto* drive = app.add_subcommand("drive", "Controller side of a split run");
  add_common(drive, true);
  for (auto* sub : {serve, drive}) {
    sub->add_option_function<std::string>(
        "--endpoint", [&](const std::string& e) { opts.endpoint = e; },
        "host:port (default 127.0.0.1:7707)");
  }
  auto* gen = app.add_subcommand("gen-track", "Write the reference path as CSV");
  add_common(gen, false);
  auto* validate = app.add_subcommand("validate", "Check a scenario and print its digest");
  add_common(validate, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : mfc::kExitValidation;
  }

  if (!scenario.empty()) opts.scenario = scenario;
  if (!out.empty()) opts.out = out;
  for (auto* sub : {run, serve, drive, gen, validate}) {
    if (sub->parsed() && sub->count("--seed") > 0) opts.seed = seed;
  }

  if (run->parsed()) return mfc::cmd_run(opts, std::cerr);
  if (serve->parsed()) return mfc::cmd_serve(opts, std::cerr);
  if (drive->parsed()) return mfc::cmd_drive(opts, std::cerr);
  if (gen->parsed()) return mfc::cmd_gen_track(opts, std::cerr);
  return mfc::cmd_validate(opts, std::cerr);
}
