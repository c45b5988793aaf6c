// Copyright 2026 The tcqsim Authors
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

// tcqsim: scan-spectrum | synthesize | evolve | compile

#include <CLI11.hpp>

#include <iostream>

#include "tcqsim/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Tunable-coupling transmon simulation toolkit"};
  app.set_version_flag("--version", TCQSIM_VERSION);
  app.require_subcommand(1);

  tcq::CommandContext ctx;
  std::size_t threads = 0;
  const struct {
    const char* name;
    const char* help;
  } commands[] = {{"scan-spectrum", "Spectrum and charge matrix elements on a flux grid"},
                  {"synthesize", "Flux pulse for a two-tone coupling, induced couplings and spectra"},
                  {"evolve", "Lindblad evolution of N qutrits and a resonator"},
                  {"compile", "Stabilizer gate sequence and its dense verification"}};
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", ctx.config, "JSON configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", ctx.out, "Output directory")->required();
    sub->add_option("--threads", threads, "Cap on worker threads (default: hardware concurrency)")
        ->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : tcq::kExitConfig;
  }
  if (threads > 0) ctx.threads = threads;
  ctx.log = &std::cout;
  return tcq::run_command(app.get_subcommands().front()->get_name(), ctx, std::cerr);
}
