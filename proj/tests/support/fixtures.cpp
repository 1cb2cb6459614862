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

#include "fixtures.hpp"

#include <algorithm>
#include <string_view>

#include "ttsim/random.hpp"

namespace ttsim::testing {

std::filesystem::path data_dir() { return TTSIM_TEST_DATA_DIR; }

std::vector<RequestSpec> bursty_fixture() {
  constexpr std::uint64_t kSeed = 20260415;
  constexpr int kBursts = 8;
  constexpr double kBurstGapMs = 6000.0;
  constexpr double kBurstRatePerMs = 40.0 / 1000.0;

  Rng rng(kSeed);
  const auto table = sharegpt_like_table();
  std::vector<RequestSpec> out;
  for (int b = 0; b < kBursts; ++b) {
    const auto n = 30 + rng.below(20);
    double t = b * kBurstGapMs;
    for (std::uint64_t i = 0; i < n; ++i) {
      t += rng.exponential(kBurstRatePerMs);
      const LengthPair& row = table[rng.below(table.size())];
      out.push_back({static_cast<RequestId>(out.size()), t, row.input, row.output});
    }
  }
  return out;
}

PipelineConfig fixture_pipeline() {
  PipelineConfig p;
  p.depth = 4;
  return p;
}

KvConfig fixture_kv() {
  KvConfig kv;
  kv.page_size = 16;
  kv.total_pages = 1024;
  return kv;
}

SchedulerChoice throttle_choice(ThrottleConfig cfg) {
  SchedulerChoice c;
  c.policy = Policy::kThrottle;
  c.throttle = cfg;
  return c;
}

SchedulerChoice sarathi_choice(std::int64_t budget) {
  SchedulerChoice c;
  c.policy = Policy::kSarathi;
  c.token_budget = budget;
  return c;
}

std::vector<RequestSpec> decode_groups_scenario() {
  std::vector<RequestSpec> w;
  auto add = [&w](double t, int n) {
    for (int i = 0; i < n; ++i) w.push_back({static_cast<RequestId>(w.size()), t, 1, 60});
  };
  add(0.0, 6);
  add(3.0, 2);
  add(6.0, 4);
  return w;
}

SmallCase random_small_case(Rng& rng) {
  auto pick = [&rng](std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
  };
  SmallCase c;
  const auto n = pick(1, 3);
  for (std::int64_t i = 0; i < n; ++i) {
    c.workload.push_back({static_cast<RequestId>(i), static_cast<double>(pick(0, 30)),
                          pick(1, 40), pick(1, 6)});
  }
  std::stable_sort(c.workload.begin(), c.workload.end(), arrives_before);

  static constexpr std::string_view kNames[] = {"throttle", "throttle-wt-only",
                                                "throttle-ut-only", "sarathi"};
  ThrottleConfig t;
  t.iterations = pick(1, 4);
  t.min_p = pick(1, 8);
  t.max_p = t.min_p + pick(0, 24);
  t.kv_thresh = 0.0;
  c.scheduler = SchedulerChoice::from_name(kNames[rng.below(4)], t, pick(2, 40));

  c.pipeline.depth = pick(1, 2);
  c.pipeline.cost.c0_ms = static_cast<double>(pick(1, 4));
  c.pipeline.cost.per_token_ms = static_cast<double>(pick(0, 1));
  c.pipeline.cost.per_kctx_ms = 0.0;
  c.pipeline.comm.latency_ms = static_cast<double>(pick(0, 2));
  c.pipeline.comm.bandwidth_bytes_per_ms = 1024.0;
  c.pipeline.comm.bytes_per_token = rng.below(2) == 0 ? 0.0 : 1024.0;

  c.kv.page_size = pick(1, 16);
  c.kv.total_pages = 4096;
  return c;
}

}  // namespace ttsim::testing
