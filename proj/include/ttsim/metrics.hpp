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

#include <optional>
#include <span>
#include <vector>

#include "ttsim/engine.hpp"
#include "ttsim/records.hpp"

namespace ttsim {

// Every latency metric averages over finished requests only; with none
// eligible the metric is absent.

std::optional<double> mean_ttft(std::span<const RequestRecord> records);

// Mean of per-request (completion - first_token) / (output_tokens - 1) over
// finished requests with at least two output tokens.
std::optional<double> mean_tpot(std::span<const RequestRecord> records);

std::optional<double> mean_e2el(std::span<const RequestRecord> records);

struct TimeWindow {
  double start_ms = 0.0;
  double end_ms = 0.0;
};

/// Input plus output tokens of finished requests per second of `window`
/// (default: first arrival to last completion among finished requests).
std::optional<double> throughput(std::span<const RequestRecord> records,
                                 std::optional<TimeWindow> window = std::nullopt);

/// Fraction of finished requests meeting both limits. A single-token
/// response meets the TPOT limit trivially.
std::optional<double> slo_attainment(std::span<const RequestRecord> records, double ttft_limit_ms,
                                     double tpot_limit_ms);

struct Fluctuation {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

std::optional<Fluctuation> token_fluctuation(std::span<const IterationRecord> iterations);

/// Flat per-iteration token level of a perfectly balanced schedule doing the
/// same work in the same number of iterations.
std::optional<double> ideal_balance_reference(std::span<const IterationRecord> iterations);

struct SloLimits {
  double ttft_ms = 3000.0;
  double tpot_ms = 150.0;
};

struct Report {
  std::size_t finished = 0;
  std::size_t unfinished = 0;
  std::optional<double> ttft_mean_ms;
  std::optional<double> tpot_mean_ms;
  std::optional<double> e2el_mean_ms;
  std::optional<double> throughput_tokens_per_s;
  std::optional<double> slo_attainment;
  std::optional<double> token_mean;
  std::optional<double> token_stddev;
  std::optional<double> ideal_tokens_per_iteration;
  std::vector<double> bubble_fractions;
  double bubble_mean = 0.0;
  double makespan_ms = 0.0;
  std::int64_t iterations = 0;
  std::int64_t preemptions = 0;
  std::int64_t committed_tokens = 0;
  std::int64_t discarded_tokens = 0;
  SloLimits slo;
  std::vector<RequestRecord> requests;
  std::vector<IterationRecord> iteration_table;
};

Report summarize(const RunResult& result, const SloLimits& slo);

}  // namespace ttsim
