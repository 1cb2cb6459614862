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

#include "ttsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ttsim {
namespace {

template <typename Pred, typename Value>
std::optional<double> mean_over(std::span<const RequestRecord> records, Pred keep, Value value) {
  std::vector<double> values;
  for (const RequestRecord& r : records) {
    if (keep(r)) values.push_back(value(r));
  }
  if (values.empty()) return std::nullopt;
  // Summing in sorted order makes the mean independent of record order.
  std::sort(values.begin(), values.end());
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

bool finished(const RequestRecord& r) { return r.finished(); }

bool has_tpot(const RequestRecord& r) { return r.finished() && r.output_tokens >= 2; }

double request_ttft(const RequestRecord& r) { return *r.first_token_ms - r.arrival_ms; }

double request_tpot(const RequestRecord& r) {
  return (*r.completion_ms - *r.first_token_ms) / static_cast<double>(r.output_tokens - 1);
}

}  // namespace

std::optional<double> mean_ttft(std::span<const RequestRecord> records) {
  return mean_over(records, finished, request_ttft);
}

std::optional<double> mean_tpot(std::span<const RequestRecord> records) {
  return mean_over(records, has_tpot, request_tpot);
}

std::optional<double> mean_e2el(std::span<const RequestRecord> records) {
  return mean_over(records, finished,
                   [](const RequestRecord& r) { return *r.completion_ms - r.arrival_ms; });
}

std::optional<double> throughput(std::span<const RequestRecord> records,
                                 std::optional<TimeWindow> window) {
  double tokens = 0.0;
  bool any = false;
  TimeWindow w{0.0, 0.0};
  for (const RequestRecord& r : records) {
    if (!r.finished()) continue;
    tokens += static_cast<double>(r.input_tokens + r.output_tokens);
    if (!any) {
      w = {r.arrival_ms, *r.completion_ms};
      any = true;
    } else {
      w.start_ms = std::min(w.start_ms, r.arrival_ms);
      w.end_ms = std::max(w.end_ms, *r.completion_ms);
    }
  }
  if (!any) return std::nullopt;
  if (window) w = *window;
  const double span_ms = w.end_ms - w.start_ms;
  if (!(span_ms > 0.0)) return std::nullopt;
  return tokens / (span_ms / 1000.0);
}

std::optional<double> slo_attainment(std::span<const RequestRecord> records, double ttft_limit_ms,
                                     double tpot_limit_ms) {
  std::size_t n = 0;
  std::size_t met = 0;
  for (const RequestRecord& r : records) {
    if (!r.finished()) continue;
    ++n;
    const bool ttft_ok = request_ttft(r) <= ttft_limit_ms;
    const bool tpot_ok = r.output_tokens < 2 || request_tpot(r) <= tpot_limit_ms;
    if (ttft_ok && tpot_ok) ++met;
  }
  if (n == 0) return std::nullopt;
  return static_cast<double>(met) / static_cast<double>(n);
}

std::optional<Fluctuation> token_fluctuation(std::span<const IterationRecord> iterations) {
  if (iterations.empty()) return std::nullopt;
  const double n = static_cast<double>(iterations.size());
  double sum = 0.0;
  for (const IterationRecord& it : iterations) sum += static_cast<double>(it.total_tokens);
  const double mean = sum / n;
  double sq = 0.0;
  for (const IterationRecord& it : iterations) {
    const double d = static_cast<double>(it.total_tokens) - mean;
    sq += d * d;
  }
  return Fluctuation{mean, std::sqrt(sq / n)};
}

std::optional<double> ideal_balance_reference(std::span<const IterationRecord> iterations) {
  if (iterations.empty()) return std::nullopt;
  const std::int64_t total =
      std::accumulate(iterations.begin(), iterations.end(), std::int64_t{0},
                      [](std::int64_t acc, const IterationRecord& it) {
                        return acc + it.total_tokens;
                      });
  return static_cast<double>(total) / static_cast<double>(iterations.size());
}

Report summarize(const RunResult& result, const SloLimits& slo) {
  Report rep;
  rep.slo = slo;
  rep.requests = result.requests;
  rep.iteration_table = result.iterations;
  rep.finished = static_cast<std::size_t>(
      std::count_if(result.requests.begin(), result.requests.end(), finished));
  rep.unfinished = result.requests.size() - rep.finished;
  rep.ttft_mean_ms = mean_ttft(result.requests);
  rep.tpot_mean_ms = mean_tpot(result.requests);
  rep.e2el_mean_ms = mean_e2el(result.requests);
  rep.throughput_tokens_per_s = throughput(result.requests);
  rep.slo_attainment = slo_attainment(result.requests, slo.ttft_ms, slo.tpot_ms);
  if (auto f = token_fluctuation(result.iterations)) {
    rep.token_mean = f->mean;
    rep.token_stddev = f->stddev;
  }
  rep.ideal_tokens_per_iteration = ideal_balance_reference(result.iterations);
  rep.bubble_fractions = bubble_accounting(result.stage_busy, result.depth, result.makespan_ms);
  if (!rep.bubble_fractions.empty()) {
    rep.bubble_mean =
        std::accumulate(rep.bubble_fractions.begin(), rep.bubble_fractions.end(), 0.0) /
        static_cast<double>(rep.bubble_fractions.size());
  }
  rep.makespan_ms = result.makespan_ms;
  rep.iterations = static_cast<std::int64_t>(result.iterations.size());
  rep.preemptions = result.preemptions;
  rep.committed_tokens = result.committed_tokens;
  rep.discarded_tokens = result.discarded_tokens;
  return rep;
}

}  // namespace ttsim
