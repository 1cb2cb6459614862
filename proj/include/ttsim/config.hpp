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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ttsim/engine.hpp"
#include "ttsim/kvcache.hpp"
#include "ttsim/metrics.hpp"
#include "ttsim/workload.hpp"

namespace ttsim {

struct WorkloadConfig {
  enum class Source { kSynthetic, kTrace };

  Source source = Source::kSynthetic;
  std::filesystem::path trace_path;
  // Trace source only: replace the recorded arrival times with Poisson
  // arrivals at `rate_per_s`, keeping the recorded lengths.
  bool resample_arrivals = false;
  double rate_per_s = 4.0;
  std::int64_t num_requests = 256;  // trace source: 0 keeps every row
  std::string lengths = "sharegpt";
  LengthDistribution distribution;
};

struct RunConfig {
  WorkloadConfig workload;
  SchedulerChoice scheduler;
  PipelineConfig pipeline;
  KvConfig kv;
  SloLimits slo;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "out";
  std::optional<double> horizon_ms;
  bool events_log = false;
  std::vector<double> rates;
  std::vector<std::string> schedulers;
  std::int64_t threads = 0;
  // Fully merged configuration document; hashed to identify runs.
  nlohmann::ordered_json resolved;
};

// "section.key" = "value" pairs applied after the file, in order.
using Overrides = std::vector<std::pair<std::string, std::string>>;

/// The complete configuration document with every key at its default.
const nlohmann::ordered_json& default_config();

/// Every accepted "section.key" name, in document order.
std::vector<std::string> config_keys();

/// Merges `file` and `overrides` over the defaults and validates the result.
/// Throws ConfigError for unknown keys (listing the valid ones), type
/// mismatches, and range violations.
RunConfig parse_config(const nlohmann::ordered_json& file, const Overrides& overrides = {});

/// As parse_config; blank text means "all defaults".
RunConfig parse_config_text(std::string_view text, const Overrides& overrides = {});

RunConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);
std::string config_hash(const RunConfig& cfg);

}  // namespace ttsim
