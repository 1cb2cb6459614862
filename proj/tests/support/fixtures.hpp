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
#include <vector>

#include "ttsim/engine.hpp"
#include "ttsim/random.hpp"
#include "ttsim/workload.hpp"

namespace ttsim::testing {

std::filesystem::path data_dir();

// Bursty arrivals: eight bursts six seconds apart, each a Poisson flurry of
// 30-49 requests at 40 req/s with conversational lengths. Regenerated from a
// fixed seed; the bundled bursty_fixture.jsonl must match it.
std::vector<RequestSpec> bursty_fixture();

// Four-stage pipeline with the default cost and PCIe models.
PipelineConfig fixture_pipeline();

// Cache small enough for bursts to push it toward capacity.
KvConfig fixture_kv();

SchedulerChoice throttle_choice(ThrottleConfig cfg = {});
SchedulerChoice sarathi_choice(std::int64_t budget = 2048);

// Static decode population of 12 requests arriving in groups of 6, 2 and 4.
// The fixed-budget scheduler keeps the groups together as uneven batches.
std::vector<RequestSpec> decode_groups_scenario();

struct SmallCase {
  std::vector<RequestSpec> workload;
  SchedulerChoice scheduler;
  PipelineConfig pipeline;
  KvConfig kv;
};

// Up to three requests on a pipeline of depth <= 2 with integer arrival,
// stage and transfer times and an ample cache.
SmallCase random_small_case(Rng& rng);

}  // namespace ttsim::testing
