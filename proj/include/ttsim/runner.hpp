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

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ttsim/config.hpp"
#include "ttsim/metrics.hpp"

namespace ttsim {

// Fixed column layouts of the summary tables.
inline constexpr std::string_view kSweepCsvHeader =
    "rate,scheduler,status,finished,unfinished,ttft_ms,tpot_ms,e2el_ms,throughput_tps,"
    "slo_attainment,token_stddev,bubble_mean,bubble_per_stage,preemptions";
inline constexpr std::string_view kAblationCsvHeader =
    "label,scheduler,workload_hash,status,finished,unfinished,ttft_ms,tpot_ms,e2el_ms,"
    "throughput_tps,slo_attainment,token_stddev,bubble_mean,preemptions";

struct RunOutcome {
  std::string name;  // output subdirectory
  std::string scheduler;
  std::optional<double> rate;
  std::string config_hash;
  std::string workload_hash;
  std::optional<Report> report;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

/// Requests described by cfg.workload (synthesized, or loaded from a trace
/// and optionally re-timed with Poisson arrivals).
std::vector<RequestSpec> build_workload(const RunConfig& cfg);

std::string workload_hash(std::span<const RequestSpec> requests);

/// Copy of `cfg` running `scheduler` and, when given, Poisson arrivals at
/// `rate` (a trace source switches to resampled arrivals).
RunConfig with_run(const RunConfig& cfg, std::string_view scheduler, std::optional<double> rate);

/// Label used in ablation output for a scheduler name.
std::string ablation_label(std::string_view scheduler);

/// Simulates one configuration and writes report.json, requests.csv,
/// iterations.csv (and events.log when enabled) under out_dir/<name>/.
/// Failures are captured in the outcome rather than thrown.
RunOutcome execute_run(const RunConfig& cfg);

/// Single run plus manifest.json.
RunOutcome run_once(const RunConfig& cfg);

/// One run per (rate, scheduler), rates outermost, then sweep.csv and
/// manifest.json. Runs execute on cfg.threads workers (0: hardware threads).
std::vector<RunOutcome> run_sweep(const RunConfig& cfg);

/// The full scheduler and its three variants on one shared workload, then
/// ablation.csv and manifest.json.
std::vector<RunOutcome> run_ablation(const RunConfig& cfg);

/// Writes the configured workload as a trace file.
std::size_t gen_trace(const RunConfig& cfg, const std::filesystem::path& path);

}  // namespace ttsim
