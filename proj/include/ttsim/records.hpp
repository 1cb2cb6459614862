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
#include <optional>

#include "ttsim/workload.hpp"

namespace ttsim {

struct RequestRecord {
  RequestId id = 0;
  double arrival_ms = 0.0;
  std::optional<double> first_token_ms;
  std::optional<double> completion_ms;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  std::int64_t preemption_count = 0;

  bool finished() const { return completion_ms.has_value(); }
};

struct IterationRecord {
  std::int64_t batch_seq = 0;
  double schedule_time_ms = 0.0;
  std::int64_t prefill_tokens = 0;
  std::int64_t decode_tokens = 0;
  std::int64_t total_tokens = 0;
};

}  // namespace ttsim
