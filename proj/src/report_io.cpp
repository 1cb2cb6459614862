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

#include "ttsim/report_io.hpp"

#include <fstream>
#include <ostream>
#include <system_error>

#include "ttsim/format.hpp"

namespace ttsim {
namespace {

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

}  // namespace

std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

nlohmann::ordered_json report_to_json(const Report& r) {
  nlohmann::ordered_json j;
  j["finished_requests"] = r.finished;
  j["unfinished_requests"] = r.unfinished;
  j["ttft_mean_ms"] = optional_json(r.ttft_mean_ms);
  j["tpot_mean_ms"] = optional_json(r.tpot_mean_ms);
  j["e2el_mean_ms"] = optional_json(r.e2el_mean_ms);
  j["throughput_tokens_per_s"] = optional_json(r.throughput_tokens_per_s);
  j["slo_attainment"] = optional_json(r.slo_attainment);
  j["slo_ttft_ms"] = r.slo.ttft_ms;
  j["slo_tpot_ms"] = r.slo.tpot_ms;
  j["token_mean"] = optional_json(r.token_mean);
  j["token_stddev"] = optional_json(r.token_stddev);
  j["ideal_tokens_per_iteration"] = optional_json(r.ideal_tokens_per_iteration);
  j["ideal_reference"] = "total batched tokens / number of iterations of this run";
  j["bubble_fractions"] = r.bubble_fractions;
  j["bubble_mean"] = r.bubble_mean;
  j["makespan_ms"] = r.makespan_ms;
  j["iterations"] = r.iterations;
  j["preemptions"] = r.preemptions;
  j["committed_tokens"] = r.committed_tokens;
  j["discarded_tokens"] = r.discarded_tokens;
  return j;
}

void write_requests_csv(std::ostream& out, const Report& report) {
  out << kRequestsCsvHeader << '\n';
  for (const RequestRecord& r : report.requests) {
    std::optional<double> ttft, tpot, e2el;
    if (r.first_token_ms) ttft = *r.first_token_ms - r.arrival_ms;
    if (r.completion_ms) {
      e2el = *r.completion_ms - r.arrival_ms;
      if (r.output_tokens >= 2) {
        tpot = (*r.completion_ms - *r.first_token_ms) / static_cast<double>(r.output_tokens - 1);
      }
    }
    out << r.id << ',' << format_double(r.arrival_ms) << ',' << format_optional(r.first_token_ms)
        << ',' << format_optional(r.completion_ms) << ',' << r.input_tokens << ','
        << r.output_tokens << ',' << r.preemption_count << ',' << format_optional(ttft) << ','
        << format_optional(tpot) << ',' << format_optional(e2el) << '\n';
  }
}

void write_iterations_csv(std::ostream& out, const Report& report) {
  out << kIterationsCsvHeader << '\n';
  for (const IterationRecord& it : report.iteration_table) {
    out << it.batch_seq << ',' << format_double(it.schedule_time_ms) << ',' << it.prefill_tokens
        << ',' << it.decode_tokens << ',' << it.total_tokens << '\n';
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace ttsim
