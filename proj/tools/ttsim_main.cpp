// Copyright 2026 The ttsim Authors
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

// Command-line front end: run, sweep, ablate, gen-trace.

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "ttsim/config.hpp"
#include "ttsim/errors.hpp"
#include "ttsim/format.hpp"
#include "ttsim/report_io.hpp"
#include "ttsim/runner.hpp"

namespace {

constexpr const char* kOutDirEnv = "TTSIM_OUT_DIR";

struct CommandArgs {
  std::string config_path;
  std::map<std::string, std::string> flag_values;
};

// Registers --config and one --section.key flag per config key.
void add_config_flags(CLI::App* cmd, CommandArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "JSON configuration file")
      ->check(CLI::ExistingFile);
  for (const std::string& key : ttsim::config_keys()) {
    cmd->add_option("--" + key, args.flag_values[key], "override " + key);
  }
}

// The config file, then TTSIM_OUT_DIR, then command-line flags.
ttsim::RunConfig resolve(const CLI::App* cmd, const CommandArgs& args) {
  ttsim::Overrides overrides;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) {
    overrides.emplace_back("run.out_dir", env);
  }
  for (const std::string& key : ttsim::config_keys()) {
    if (cmd->count("--" + key) > 0) overrides.emplace_back(key, args.flag_values.at(key));
  }
  if (args.config_path.empty()) return ttsim::parse_config_text("", overrides);
  return ttsim::load_config(args.config_path, overrides);
}

void print_summary(const ttsim::RunOutcome& o) {
  if (!o.ok()) {
    std::cerr << o.name << ": " << o.error << '\n';
    return;
  }
  const ttsim::Report& r = *o.report;
  std::cout << o.name << ": finished=" << r.finished << " unfinished=" << r.unfinished
            << " ttft_ms=" << ttsim::format_optional(r.ttft_mean_ms)
            << " tpot_ms=" << ttsim::format_optional(r.tpot_mean_ms)
            << " throughput_tps=" << ttsim::format_optional(r.throughput_tokens_per_s)
            << " token_stddev=" << ttsim::format_optional(r.token_stddev)
            << " bubble_mean=" << ttsim::format_double(r.bubble_mean) << '\n';
}

int exit_code(std::span<const ttsim::RunOutcome> outcomes) {
  for (const auto& o : outcomes) {
    if (!o.ok()) return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pipeline-parallel LLM serving simulator"};
  app.require_subcommand(1);

  CommandArgs run_args, sweep_args, ablate_args, trace_args;
  auto* run_cmd = app.add_subcommand("run", "simulate one configuration");
  add_config_flags(run_cmd, run_args);
  auto* sweep_cmd = app.add_subcommand("sweep", "simulate every (rate, scheduler) pair");
  add_config_flags(sweep_cmd, sweep_args);
  auto* ablate_cmd = app.add_subcommand("ablate", "compare the scheduler variants on one workload");
  add_config_flags(ablate_cmd, ablate_args);
  auto* trace_cmd = app.add_subcommand("gen-trace", "write the configured workload as a trace");
  add_config_flags(trace_cmd, trace_args);
  std::string trace_out;
  trace_cmd->add_option("-o,--output", trace_out, "trace file to write")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const ttsim::RunOutcome o = ttsim::run_once(resolve(run_cmd, run_args));
      print_summary(o);
      return o.ok() ? 0 : 1;
    }
    if (sweep_cmd->parsed()) {
      const auto outcomes = ttsim::run_sweep(resolve(sweep_cmd, sweep_args));
      for (const auto& o : outcomes) print_summary(o);
      return exit_code(outcomes);
    }
    if (ablate_cmd->parsed()) {
      const auto outcomes = ttsim::run_ablation(resolve(ablate_cmd, ablate_args));
      for (const auto& o : outcomes) print_summary(o);
      return exit_code(outcomes);
    }
    if (trace_cmd->parsed()) {
      const std::size_t n = ttsim::gen_trace(resolve(trace_cmd, trace_args), trace_out);
      std::cout << "wrote " << n << " requests to " << trace_out << '\n';
      return 0;
    }
  } catch (const ttsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
