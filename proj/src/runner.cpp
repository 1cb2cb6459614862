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

#include "ttsim/runner.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <sstream>
#include <thread>

#include "ttsim/errors.hpp"
#include "ttsim/format.hpp"
#include "ttsim/random.hpp"
#include "ttsim/report_io.hpp"

namespace ttsim {
namespace {

std::string run_name(std::string_view scheduler, const std::optional<double>& rate) {
  std::string name(scheduler);
  name += rate ? "_rate" + format_double(*rate) : std::string("_trace");
  return name;
}

std::optional<double> effective_rate(const RunConfig& cfg) {
  if (cfg.workload.source == WorkloadConfig::Source::kTrace && !cfg.workload.resample_arrivals) {
    return std::nullopt;
  }
  return cfg.workload.rate_per_s;
}

std::string csv_cell(std::string text) {
  std::replace(text.begin(), text.end(), ',', ';');
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

std::string status_cell(const RunOutcome& o) {
  return o.ok() ? std::string("ok") : csv_cell("error: " + o.error);
}

// ttft,tpot,e2el,throughput,slo,token_stddev,bubble_mean
std::string metric_cells(const RunOutcome& o) {
  if (!o.report) return ",,,,,,,,";
  const Report& r = *o.report;
  std::ostringstream ss;
  ss << r.finished << ',' << r.unfinished << ',' << format_optional(r.ttft_mean_ms) << ','
     << format_optional(r.tpot_mean_ms) << ',' << format_optional(r.e2el_mean_ms) << ','
     << format_optional(r.throughput_tokens_per_s) << ',' << format_optional(r.slo_attainment)
     << ',' << format_optional(r.token_stddev) << ',' << format_double(r.bubble_mean);
  return ss.str();
}

std::string bubble_stage_cell(const RunOutcome& o) {
  if (!o.report) return "";
  std::string out;
  for (double f : o.report->bubble_fractions) {
    if (!out.empty()) out += ';';
    out += format_double(f);
  }
  return out;
}

std::string preemption_cell(const RunOutcome& o) {
  return o.report ? std::to_string(o.report->preemptions) : std::string();
}

void write_manifest(const std::filesystem::path& dir, std::string_view command,
                    std::span<const RunOutcome> runs) {
  nlohmann::ordered_json m;
  m["command"] = command;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const RunOutcome& o : runs) {
    nlohmann::ordered_json e;
    e["name"] = o.name;
    e["scheduler"] = o.scheduler;
    e["rate"] = o.rate ? nlohmann::ordered_json(*o.rate) : nlohmann::ordered_json(nullptr);
    e["config_hash"] = o.config_hash;
    e["workload_hash"] = o.workload_hash;
    e["status"] = o.ok() ? std::string("ok") : "error: " + o.error;
    list.push_back(std::move(e));
  }
  m["runs"] = std::move(list);
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

std::vector<RunOutcome> execute_all(std::span<const RunConfig> configs, std::int64_t threads) {
  std::vector<RunOutcome> out(configs.size());
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(configs.size(), 1));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) out[i] = execute_run(configs[i]);
  };
  if (workers <= 1) {
    work();
    return out;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  return out;
}

}  // namespace

std::vector<RequestSpec> build_workload(const RunConfig& cfg) {
  const WorkloadConfig& w = cfg.workload;
  if (w.source == WorkloadConfig::Source::kSynthetic) {
    return synthesize(ArrivalProcess::poisson(w.rate_per_s, cfg.seed), w.distribution,
                      static_cast<std::size_t>(w.num_requests), cfg.seed);
  }
  std::vector<RequestSpec> requests = load_trace(w.trace_path);
  if (w.num_requests > 0 && static_cast<std::size_t>(w.num_requests) < requests.size()) {
    requests.resize(static_cast<std::size_t>(w.num_requests));
  }
  if (w.resample_arrivals) {
    const std::vector<double> times = generate_arrivals(
        ArrivalProcess::poisson(w.rate_per_s, derive_seed(cfg.seed, 0)), requests.size());
    for (std::size_t i = 0; i < requests.size(); ++i) requests[i].arrival_ms = times[i];
  }
  return requests;
}

std::string workload_hash(std::span<const RequestSpec> requests) {
  std::ostringstream ss;
  write_trace(ss, requests);
  return hex64(fnv1a64(ss.str()));
}

RunConfig with_run(const RunConfig& cfg, std::string_view scheduler, std::optional<double> rate) {
  RunConfig out = cfg;
  out.scheduler = SchedulerChoice::from_name(scheduler, cfg.scheduler.throttle,
                                             cfg.scheduler.token_budget);
  auto& sched = out.resolved["sched"];
  sched["policy"] = out.scheduler.policy == Policy::kSarathi ? "sarathi" : "throttle";
  sched["mode"] = std::string(to_string(out.scheduler.throttle.mode));
  if (rate) {
    if (!(*rate > 0.0)) throw ConfigError("request rate must be positive");
    out.workload.rate_per_s = *rate;
    out.resolved["workload"]["rate"] = *rate;
    if (out.workload.source == WorkloadConfig::Source::kTrace) {
      out.workload.resample_arrivals = true;
      out.resolved["workload"]["resample_arrivals"] = true;
    }
  }
  return out;
}

std::string ablation_label(std::string_view scheduler) {
  if (scheduler == "throttle") return "full";
  if (scheduler == "throttle-ut-only") return "w/o WT";
  if (scheduler == "throttle-wt-only") return "w/o UT";
  if (scheduler == "sarathi") return "w/ CK";
  return std::string(scheduler);
}

RunOutcome execute_run(const RunConfig& cfg) {
  RunOutcome o;
  o.scheduler = cfg.scheduler.name();
  o.rate = effective_rate(cfg);
  o.name = run_name(o.scheduler, o.rate);
  o.config_hash = config_hash(cfg);
  try {
    const std::vector<RequestSpec> workload = build_workload(cfg);
    o.workload_hash = workload_hash(workload);
    EngineOptions options;
    options.horizon_ms = cfg.horizon_ms;
    options.record_events = cfg.events_log;
    const RunResult result = run(workload, cfg.scheduler, cfg.pipeline, cfg.kv, options);
    Report report = summarize(result, cfg.slo);

    const std::filesystem::path dir = cfg.out_dir / o.name;
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json doc;
    doc["scheduler"] = o.scheduler;
    doc["rate"] = o.rate ? nlohmann::ordered_json(*o.rate) : nlohmann::ordered_json(nullptr);
    doc["config_hash"] = o.config_hash;
    doc["workload_hash"] = o.workload_hash;
    doc["horizon_reached"] = result.horizon_reached;
    doc["metrics"] = report_to_json(report);
    write_file_atomic(dir / "report.json", doc.dump(2) + "\n");
    std::ostringstream req, iter;
    write_requests_csv(req, report);
    write_iterations_csv(iter, report);
    write_file_atomic(dir / "requests.csv", req.str());
    write_file_atomic(dir / "iterations.csv", iter.str());
    if (cfg.events_log) {
      std::ostringstream ev;
      write_event_trace(ev, result.events);
      write_file_atomic(dir / "events.log", ev.str());
    }
    o.report = std::move(report);
  } catch (const std::exception& e) {
    o.error = e.what();
  }
  return o;
}

RunOutcome run_once(const RunConfig& cfg) {
  RunOutcome o = execute_run(cfg);
  write_manifest(cfg.out_dir, "run", std::span<const RunOutcome>(&o, 1));
  return o;
}

std::vector<RunOutcome> run_sweep(const RunConfig& cfg) {
  if (cfg.rates.empty()) throw ConfigError("run.rates must list at least one rate");
  if (cfg.schedulers.empty()) throw ConfigError("run.schedulers must list at least one scheduler");
  std::vector<RunConfig> configs;
  for (double rate : cfg.rates) {
    for (const std::string& s : cfg.schedulers) configs.push_back(with_run(cfg, s, rate));
  }
  std::vector<RunOutcome> outcomes = execute_all(configs, cfg.threads);

  std::ostringstream csv;
  csv << kSweepCsvHeader << '\n';
  for (const RunOutcome& o : outcomes) {
    csv << format_optional(o.rate) << ',' << o.scheduler << ',' << status_cell(o) << ','
        << metric_cells(o) << ',' << bubble_stage_cell(o) << ',' << preemption_cell(o) << '\n';
  }
  std::filesystem::create_directories(cfg.out_dir);
  write_file_atomic(cfg.out_dir / "sweep.csv", csv.str());
  write_manifest(cfg.out_dir, "sweep", outcomes);
  return outcomes;
}

std::vector<RunOutcome> run_ablation(const RunConfig& cfg) {
  static constexpr std::string_view kVariants[] = {"throttle", "throttle-ut-only",
                                                    "throttle-wt-only", "sarathi"};
  std::vector<RunConfig> configs;
  for (std::string_view s : kVariants) configs.push_back(with_run(cfg, s, std::nullopt));
  std::vector<RunOutcome> outcomes = execute_all(configs, cfg.threads);

  std::ostringstream csv;
  csv << kAblationCsvHeader << '\n';
  for (const RunOutcome& o : outcomes) {
    csv << ablation_label(o.scheduler) << ',' << o.scheduler << ',' << o.workload_hash << ','
        << status_cell(o) << ',' << metric_cells(o) << ',' << preemption_cell(o) << '\n';
  }
  std::filesystem::create_directories(cfg.out_dir);
  write_file_atomic(cfg.out_dir / "ablation.csv", csv.str());
  write_manifest(cfg.out_dir, "ablate", outcomes);
  return outcomes;
}

std::size_t gen_trace(const RunConfig& cfg, const std::filesystem::path& path) {
  const std::vector<RequestSpec> requests = build_workload(cfg);
  std::ostringstream ss;
  write_trace(ss, requests);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write_file_atomic(path, ss.str());
  return requests.size();
}

}  // namespace ttsim
