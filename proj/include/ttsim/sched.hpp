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
#include <string>
#include <string_view>
#include <vector>

#include "ttsim/workload.hpp"

namespace ttsim {

/// Which prefill formula the throttling scheduler uses. All three honor the
/// KV idle threshold: at or below it, no prefill is scheduled.
enum class ThrottleMode {
  kCombined,  // waiting-token and KV-idle terms together
  kWtOnly,    // waiting-token term only
  kUtOnly,    // KV-idle term only
};

struct ThrottleConfig {
  std::int64_t iterations = 8;  // iterations over which to drain waiting prefill
  std::int64_t max_p = 2048;
  std::int64_t min_p = 32;
  double kv_thresh = 0.05;
  ThrottleMode mode = ThrottleMode::kCombined;

  void validate() const;
};

std::string_view to_string(ThrottleMode mode);
ThrottleMode parse_throttle_mode(std::string_view s);

struct SchedInputs {
  std::int64_t waiting_prefill_tokens = 0;
  std::int64_t running_decode = 0;
  double kv_free = 1.0;
  std::int64_t pipeline_depth = 1;
};

// Prefill budget from the waiting-token count alone, capped at `wp`.
std::int64_t throttle_prefill_wt(std::int64_t wp, const ThrottleConfig& cfg);
// Prefill budget from the KV idle rate alone (not capped at the waiting count).
std::int64_t throttle_prefill_ut(double kv_free, const ThrottleConfig& cfg);
// Combined budget; zero while kv_free <= kv_thresh.
std::int64_t throttle_prefill_combined(std::int64_t wp, double kv_free, const ThrottleConfig& cfg);
// Decode tokens per micro-batch: ceil(rd / depth).
std::int64_t throttle_decode(std::int64_t rd, std::int64_t depth);

/// Prefill budget for `cfg.mode`, including the suspend threshold and the
/// cap at the waiting count. With `honor_suspend` false the threshold is
/// ignored and the combined formula is evaluated literally (its min_p floor
/// then applies below the threshold too).
std::int64_t prefill_quota(const SchedInputs& in, const ThrottleConfig& cfg,
                           bool honor_suspend = true);

struct PrefillCandidate {
  RequestId id = 0;
  std::int64_t remaining = 0;  // prompt tokens not yet prefilled
  std::int64_t kv_tokens = 0;  // tokens already holding KV slots
};

struct DecodeCandidate {
  RequestId id = 0;
  std::int64_t kv_tokens = 0;
};

/// Scheduler view of the engine at one scheduling point. Candidate lists
/// hold only requests that are not in flight, in FCFS order.
struct QueueSnapshot {
  std::vector<PrefillCandidate> prefill;
  std::vector<DecodeCandidate> decode;
  std::int64_t waiting_prefill_tokens = 0;  // includes requests currently in flight
  std::int64_t running_decode = 0;          // whole decode population
  std::int64_t pipeline_depth = 1;
  std::int64_t page_size = 16;
  std::int64_t free_pages = 0;
  std::int64_t total_pages = 1;

  double kv_free() const {
    return static_cast<double>(free_pages) / static_cast<double>(total_pages);
  }
};

struct PrefillChunk {
  RequestId id = 0;
  std::int64_t tokens = 0;

  bool operator==(const PrefillChunk&) const = default;
};

struct MicroBatchPlan {
  std::vector<RequestId> decode_ids;
  std::vector<PrefillChunk> prefill_chunks;
  // Summed attention context of the decode tokens (stored tokens including
  // the new one).
  std::int64_t decode_context_tokens = 0;

  std::int64_t prefill_tokens() const;
  std::int64_t decode_tokens() const { return static_cast<std::int64_t>(decode_ids.size()); }
  std::int64_t total_tokens() const { return prefill_tokens() + decode_tokens(); }
  bool empty() const { return decode_ids.empty() && prefill_chunks.empty(); }
};

// Token Throttling: decode count from ceil(#RD / depth), prefill count from
// the configured formula. Prefill chunks are filled FCFS, split to fit the
// budget, and truncated at the first request whose chunk the KV cache cannot
// hold after reserving pages for the planned decodes.
MicroBatchPlan plan_throttled(const QueueSnapshot& snap, const ThrottleConfig& cfg,
                              bool honor_suspend = true);

// Fixed-budget baseline: every eligible decode first (even past the budget),
// then prefill chunks up to the remaining budget.
MicroBatchPlan plan_sarathi(const QueueSnapshot& snap, std::int64_t token_budget);

}  // namespace ttsim
