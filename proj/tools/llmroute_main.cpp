// Copyright 2026 The llmroute Authors.
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

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "llmroute/gateway.hpp"
#include "llmroute/harness.hpp"

namespace {

using namespace llmroute;

void write_output(const std::string& csv, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << csv;
    return;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out.good()) {
    raise(Errc::FileNotFound, "cannot open output file: " + out_path);
  }
  out << csv;
  std::cerr << "wrote " << out_path << "\n";
}

// --seed overrides the spec's seed list with a single base seed; per-session
// seeds then derive as base + index.
void apply_seed_override(ExperimentSpec& spec, const std::uint64_t* seed) {
  if (seed != nullptr) spec.seeds = {*seed};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Session-adaptive LLM routing: experiments, live runs and gateway"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string out_path;
  std::uint64_t seed_value = 0;
  bool seed_given = false;
  int parallel = 0;

  const auto add_common = [&](CLI::App* cmd, bool spec_required) {
    auto* spec_opt = cmd->add_option("--spec", spec_path,
                                     "JSON spec file (defaults to the built-in spec)");
    if (spec_required) spec_opt->required();
    cmd->add_option("--out", out_path, "output CSV path ('-' = stdout)");
    cmd->add_option("--seed", seed_value, "override the spec's base seed")
        ->each([&](const std::string&) { seed_given = true; });
    cmd->add_option("--parallel", parallel,
                    "worker threads (1 = serial reference, 0 = auto)");
  };

  auto* beta = app.add_subcommand(
      "beta-sweep", "convergence speed and reward across SLA learning rates");
  add_common(beta, false);

  auto* weight = app.add_subcommand(
      "weight-study",
      "per-round cost/latency running averages for every policy variant");
  add_common(weight, false);
  bool latency_focus = false;
  weight->add_flag("--latency", latency_focus,
                   "use the latency-weighted default spec instead of the cost one");

  auto* live = app.add_subcommand("live-run",
                                  "route a dataset through a session and log rounds");
  add_common(live, true);

  auto* serve = app.add_subcommand("serve", "run the HTTP routing gateway");
  std::string config_path;
  serve->add_option("--config", config_path, "gateway JSON config")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (beta->parsed()) {
      ExperimentSpec spec =
          spec_path.empty() ? default_beta_sweep_spec() : load_experiment_spec(spec_path);
      apply_seed_override(spec, seed_given ? &seed_value : nullptr);
      write_output(beta_sweep_csv(run_beta_sweep(spec, parallel)), out_path);
    } else if (weight->parsed()) {
      ExperimentSpec spec = spec_path.empty()
                                ? (latency_focus ? default_latency_study_spec()
                                                 : default_cost_study_spec())
                                : load_experiment_spec(spec_path);
      apply_seed_override(spec, seed_given ? &seed_value : nullptr);
      write_output(weight_study_csv(run_weight_study(spec, parallel)), out_path);
    } else if (live->parsed()) {
      LiveRunSpec spec = load_live_run_spec(spec_path);
      if (seed_given) spec.session.rng_seed = seed_value;
      write_output(run_live_session_csv(spec, &std::cerr), out_path);
    } else if (serve->parsed()) {
      GatewayConfig config = load_gateway_config(config_path);
      std::cerr << "listening on " << config.listen_address << ":"
                << config.listen_port << "\n";
      Gateway gateway(std::move(config));
      if (!gateway.listen()) {
        std::cerr << "error: failed to bind listen address\n";
        return 1;
      }
    }
  } catch (const Error& e) {
    std::cerr << "error [" << errc_name(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
