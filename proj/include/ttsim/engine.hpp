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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ttsim/kvcache.hpp"
#include "ttsim/records.hpp"
#include "ttsim/sched.hpp"
#include "ttsim/workload.hpp"

namespace ttsim {

// PCIe: 20.79 GB/s. Network: 73.28 Gb/s. Both in bytes per millisecond.
inline constexpr double kPcieBytesPerMs = 20.79e9 / 1000.0;
inline constexpr double kNetworkBytesPerMs = 73.28e9 / 8.0 / 1000.0;

/// Per-stage execution time of one micro-batch, identical on every stage:
/// c0 + per_token * tokens + per_kctx * (decode context tokens / 1024).
struct StageCostModel {
  double c0_ms = 5.0;
  double per_token_ms = 0.02;
  double per_kctx_ms = 0.075;

  void validate() const;
};

/// Activation hand-off between consecutive stages. Metadata broadcast is
/// assumed to overlap with compute and costs nothing.
struct CommModel {
  double latency_ms = 0.05;
  double bytes_per_token = 10240.0;
  double bandwidth_bytes_per_ms = kPcieBytesPerMs;

  static CommModel pcie();
  static CommModel network();
  void validate() const;
};

double stage_time(const MicroBatchPlan& plan, const StageCostModel& cost);
double transfer_time(const MicroBatchPlan& plan, const CommModel& comm);

struct PipelineConfig {
  std::int64_t depth = 4;
  StageCostModel cost;
  CommModel comm;

  void validate() const;
};

enum class Policy { kThrottle, kSarathi };

struct SchedulerChoice {
  Policy policy = Policy::kThrottle;
  ThrottleConfig throttle;
  std::int64_t token_budget = 2048;

  // "throttle", "throttle-wt-only", "throttle-ut-only" or "sarathi".
  std::string name() const;
  static SchedulerChoice from_name(std::string_view name, ThrottleConfig throttle,
                                   std::int64_t token_budget);
  void validate() const;
};

struct EngineOptions {
  std::optional<double> horizon_ms;  // stop before the first event past this time
  bool record_events = false;
  // Re-verify KV, token, capacity and causality invariants after every event;
  // a violation throws std::logic_error.
  bool check_invariants = false;
};

enum class EventKind { kArrival, kStageComplete, kTransferComplete, kSchedulePoint, kPreempt };

std::string_view to_string(EventKind kind);

// Queue entry. Events are processed in (time_ms, sequence) order.
struct SimEvent {
  double time_ms = 0.0;
  std::uint64_t sequence = 0;
  EventKind kind = EventKind::kArrival;
  std::int64_t stage = -1;
  std::int64_t batch_seq = -1;
  std::int64_t request = -1;
};

// One line of the optional event dump.
struct TraceRecord {
  double time_ms = 0.0;
  EventKind kind = EventKind::kArrival;
  std::int64_t stage = -1;
  std::int64_t batch_seq = -1;
  std::int64_t request = -1;
  std::int64_t prefill_tokens = 0;
  std::int64_t decode_tokens = 0;

  bool operator==(const TraceRecord&) const = default;
};

struct StageInterval {
  std::int64_t stage = 0;
  std::int64_t batch_seq = 0;
  double start_ms = 0.0;
  double finish_ms = 0.0;

  bool operator==(const StageInterval&) const = default;
};

struct RunResult {
  std::int64_t depth = 1;
  std::vector<RequestRecord> requests;      // FCFS order
  std::vector<IterationRecord> iterations;  // one per launched micro-batch
  std::vector<StageInterval> stage_busy;    // in start order
  std::vector<TraceRecord> events;          // empty unless record_events
  double makespan_ms = 0.0;                 // last stage completion
  std::int64_t committed_tokens = 0;
  std::int64_t discarded_tokens = 0;        // work thrown away by preemption
  std::int64_t preemptions = 0;
  bool horizon_reached = false;
};

/// Simulates serving `workload` on a `pipeline.depth`-stage pipeline.
///
/// A micro-batch is planned whenever stage 0 is idle and fewer than `depth`
/// batches are in flight. Stage s of batch i starts once batch i-1 has left
/// stage s and batch i's activations have arrived from stage s-1. Results
/// commit when the last stage finishes: decodes gain a token, prefill chunks
/// advance, a completed prompt emits the first token, and finished requests
/// release their KV pages. A decode that cannot get a KV slot preempts the
/// latest-arrived decode requests (possibly itself), which are recomputed
/// from scratch.
///
/// Throws UnschedulableError when a request could never fit in the cache and
/// ValidationError for malformed or duplicate requests.
RunResult run(std::span<const RequestSpec> workload, const SchedulerChoice& scheduler,
              const PipelineConfig& pipeline, const KvConfig& kv, const EngineOptions& options = {});

/// Idle fraction of each stage over [0, makespan]. Throws std::logic_error if
/// intervals on one stage overlap.
std::vector<double> bubble_accounting(std::span<const StageInterval> busy, std::int64_t depth,
                                      double makespan_ms);

// Header line plus one CSV line per record.
void write_event_trace(std::ostream& out, std::span<const TraceRecord> events);

}  // namespace ttsim
