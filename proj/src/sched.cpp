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

#include "ttsim/sched.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ttsim/errors.hpp"
#include "ttsim/kvcache.hpp"

namespace ttsim {
namespace {

// Formula outputs are rounded up. The slack absorbs representation error in
// products such as 2048 * 0.475 / 0.95, which must round to 1024, not 1025.
constexpr double kRoundSlack = 1e-9;

std::int64_t ceil_count(double x) {
  return static_cast<std::int64_t>(std::ceil(x - kRoundSlack));
}

double kv_headroom(double kv_free, double kv_thresh) {
  return (kv_free - kv_thresh) / (1.0 - kv_thresh);
}

void fill_prefill(MicroBatchPlan& plan, const QueueSnapshot& snap, std::int64_t quota,
                  std::int64_t free_pages) {
  if (free_pages < 0) return;
  for (const PrefillCandidate& c : snap.prefill) {
    if (quota <= 0) break;
    const std::int64_t want = std::min(c.remaining, quota);
    const std::int64_t fits =
        (pages_for(c.kv_tokens, snap.page_size) + free_pages) * snap.page_size - c.kv_tokens;
    const std::int64_t take = std::min(want, fits);
    if (take <= 0) break;
    plan.prefill_chunks.push_back({c.id, take});
    free_pages -= pages_needed(c.kv_tokens, take, snap.page_size);
    quota -= take;
    if (take < want) break;
  }
}

// Pages left after giving each planned decode its next token slot; negative
// when the decodes alone do not fit.
std::int64_t free_after_decodes(const QueueSnapshot& snap, std::size_t n_decode) {
  std::int64_t free = snap.free_pages;
  for (std::size_t i = 0; i < n_decode; ++i) {
    free -= pages_needed(snap.decode[i].kv_tokens, 1, snap.page_size);
  }
  return free;
}

void take_decodes(MicroBatchPlan& plan, const QueueSnapshot& snap, std::size_t n) {
  plan.decode_ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    plan.decode_ids.push_back(snap.decode[i].id);
    plan.decode_context_tokens += snap.decode[i].kv_tokens + 1;
  }
}

}  // namespace

void ThrottleConfig::validate() const {
  if (iterations < 1) throw ConfigError("sched.T must be >= 1");
  if (min_p < 1) throw ConfigError("sched.min_p must be >= 1");
  if (max_p < min_p) throw ConfigError("sched.max_p must be >= sched.min_p");
  if (!(kv_thresh >= 0.0 && kv_thresh < 1.0)) {
    throw ConfigError("sched.kv_thresh must be in [0, 1)");
  }
}

std::string_view to_string(ThrottleMode mode) {
  switch (mode) {
    case ThrottleMode::kCombined: return "combined";
    case ThrottleMode::kWtOnly: return "wt_only";
    case ThrottleMode::kUtOnly: return "ut_only";
  }
  return "combined";
}

ThrottleMode parse_throttle_mode(std::string_view s) {
  if (s == "combined") return ThrottleMode::kCombined;
  if (s == "wt_only") return ThrottleMode::kWtOnly;
  if (s == "ut_only") return ThrottleMode::kUtOnly;
  throw ConfigError("sched.mode must be one of combined, wt_only, ut_only");
}

std::int64_t throttle_prefill_wt(std::int64_t wp, const ThrottleConfig& cfg) {
  if (wp <= 0) return 0;
  const double per_iter = static_cast<double>(wp) / static_cast<double>(cfg.iterations);
  const double p = std::min(std::max(per_iter, static_cast<double>(cfg.min_p)),
                            static_cast<double>(cfg.max_p));
  return std::min(ceil_count(p), wp);
}

std::int64_t throttle_prefill_ut(double kv_free, const ThrottleConfig& cfg) {
  return ceil_count(
      std::max(static_cast<double>(cfg.max_p) * kv_free, static_cast<double>(cfg.min_p)));
}

std::int64_t throttle_prefill_combined(std::int64_t wp, double kv_free, const ThrottleConfig& cfg) {
  if (wp <= 0 || kv_free <= cfg.kv_thresh) return 0;
  const double per_iter = static_cast<double>(wp) / static_cast<double>(cfg.iterations);
  const double by_kv = static_cast<double>(cfg.max_p) * kv_headroom(kv_free, cfg.kv_thresh);
  const double p = std::max(std::min(per_iter, by_kv), static_cast<double>(cfg.min_p));
  return std::min(ceil_count(p), wp);
}

std::int64_t throttle_decode(std::int64_t rd, std::int64_t depth) {
  if (rd <= 0) return 0;
  return (rd + depth - 1) / depth;
}

std::int64_t prefill_quota(const SchedInputs& in, const ThrottleConfig& cfg, bool honor_suspend) {
  const std::int64_t wp = in.waiting_prefill_tokens;
  if (wp <= 0) return 0;
  const bool suspended = in.kv_free <= cfg.kv_thresh;
  if (suspended && honor_suspend) return 0;
  switch (cfg.mode) {
    case ThrottleMode::kCombined: {
      if (!suspended) return throttle_prefill_combined(wp, in.kv_free, cfg);
      // Literal formula below the threshold: the KV term is negative, so the
      // min_p floor decides.
      return std::min(cfg.min_p, wp);
    }
    case ThrottleMode::kWtOnly: return throttle_prefill_wt(wp, cfg);
    case ThrottleMode::kUtOnly: return std::min(throttle_prefill_ut(in.kv_free, cfg), wp);
  }
  return 0;
}

std::int64_t MicroBatchPlan::prefill_tokens() const {
  return std::accumulate(prefill_chunks.begin(), prefill_chunks.end(), std::int64_t{0},
                         [](std::int64_t acc, const PrefillChunk& c) { return acc + c.tokens; });
}

MicroBatchPlan plan_throttled(const QueueSnapshot& snap, const ThrottleConfig& cfg,
                              bool honor_suspend) {
  MicroBatchPlan plan;
  const std::int64_t per_batch = throttle_decode(snap.running_decode, snap.pipeline_depth);
  const auto n_decode = static_cast<std::size_t>(
      std::min<std::int64_t>(per_batch, static_cast<std::int64_t>(snap.decode.size())));
  take_decodes(plan, snap, n_decode);

  const SchedInputs in{snap.waiting_prefill_tokens, snap.running_decode, snap.kv_free(),
                       snap.pipeline_depth};
  fill_prefill(plan, snap, prefill_quota(in, cfg, honor_suspend),
               free_after_decodes(snap, n_decode));
  return plan;
}

MicroBatchPlan plan_sarathi(const QueueSnapshot& snap, std::int64_t token_budget) {
  MicroBatchPlan plan;
  take_decodes(plan, snap, snap.decode.size());
  const std::int64_t quota =
      std::max<std::int64_t>(0, token_budget - static_cast<std::int64_t>(snap.decode.size()));
  fill_prefill(plan, snap, quota, free_after_decodes(snap, snap.decode.size()));
  return plan;
}

}  // namespace ttsim
