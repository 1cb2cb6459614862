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
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "ttsim/metrics.hpp"

namespace ttsim {

// Column layouts of the two per-run tables. Absent values are empty cells.
inline constexpr std::string_view kRequestsCsvHeader =
    "id,arrival_ms,first_token_ms,completion_ms,input_tokens,output_tokens,preemption_count,"
    "ttft_ms,tpot_ms,e2el_ms";
inline constexpr std::string_view kIterationsCsvHeader =
    "batch_seq,schedule_time_ms,prefill_tokens,decode_tokens,total_tokens";

/// Aggregate metrics as an ordered JSON object; absent metrics are null.
nlohmann::ordered_json report_to_json(const Report& report);

void write_requests_csv(std::ostream& out, const Report& report);
void write_iterations_csv(std::ostream& out, const Report& report);

std::string format_optional(const std::optional<double>& v);

// Writes `contents` to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace ttsim
