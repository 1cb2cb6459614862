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

#include "ttsim/engine.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "ttsim/errors.hpp"
#include "ttsim/format.hpp"

namespace ttsim {

void StageCostModel::validate() const {
  if (c0_ms < 0.0 || per_token_ms < 0.0 || per_kctx_ms < 0.0) {
    throw ConfigError("cost coefficients must be non-negative");
  }
  if (c0_ms == 0.0 && per_token_ms == 0.0) {
    throw ConfigError("pipeline.c0_ms or pipeline.per_token_ms must be positive");
  }
}

CommModel CommModel::pcie() { return CommModel{}; }

CommModel CommModel::network() {
  CommModel m;
  m.bandwidth_bytes_per_ms = kNetworkBytesPerMs;
  return m;
}

void CommModel::validate() const {
  if (!(bandwidth_bytes_per_ms > 0.0)) throw ConfigError("comm bandwidth must be positive");
  if (latency_ms < 0.0) throw ConfigError("comm.latency_ms must be non-negative");
  if (bytes_per_token < 0.0) throw ConfigError("comm.bytes_per_token must be non-negative");
}

double stage_time(const MicroBatchPlan& plan, const StageCostModel& cost) {
  if (plan.empty()) return 0.0;
  return cost.c0_ms + cost.per_token_ms * static_cast<double>(plan.total_tokens()) +
         cost.per_kctx_ms * static_cast<double>(plan.decode_context_tokens) / 1024.0;
}

double transfer_time(const MicroBatchPlan& plan, const CommModel& comm) {
  return comm.latency_ms +
         static_cast<double>(plan.total_tokens()) * comm.bytes_per_token /
             comm.bandwidth_bytes_per_ms;
}

void PipelineConfig::validate() const {
  if (depth < 1) throw ConfigError("pipeline.depth must be >= 1");
  cost.validate();
  comm.validate();
}

std::string SchedulerChoice::name() const {
  if (policy == Policy::kSarathi) return "sarathi";
  switch (throttle.mode) {
    case ThrottleMode::kCombined: return "throttle";
    case ThrottleMode::kWtOnly: return "throttle-wt-only";
    case ThrottleMode::kUtOnly: return "throttle-ut-only";
  }
  return "throttle";
}

SchedulerChoice SchedulerChoice::from_name(std::string_view name, ThrottleConfig throttle,
                                           std::int64_t token_budget) {
  SchedulerChoice c;
  c.throttle = throttle;
  c.token_budget = token_budget;
  if (name == "sarathi") {
    c.policy = Policy::kSarathi;
  } else if (name == "throttle") {
    c.throttle.mode = ThrottleMode::kCombined;
  } else if (name == "throttle-wt-only") {
    c.throttle.mode = ThrottleMode::kWtOnly;
  } else if (name == "throttle-ut-only") {
    c.throttle.mode = ThrottleMode::kUtOnly;
  } else {
    throw ConfigError("unknown scheduler '" + std::string(name) +
                      "' (expected throttle, throttle-wt-only, throttle-ut-only, sarathi)");
  }
  return c;
}

void SchedulerChoice::validate() const {
  throttle.validate();
  if (token_budget < 1) throw ConfigError("sched.token_budget must be >= 1");
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kArrival: return "arrival";
    case EventKind::kStageComplete: return "stage_complete";
    case EventKind::kTransferComplete: return "transfer_complete";
    case EventKind::kSchedulePoint: return "schedule_point";
    case EventKind::kPreempt: return "preempt";
  }
  return "unknown";
}

namespace {

enum class Phase { kPending, kPrefill, kDecode, kFinished };

struct LiveRequest {
  RequestSpec spec;
  Phase phase = Phase::kPending;
  std::int64_t prefill_target = 0;  // prompt plus any tokens being recomputed
  std::int64_t prefilled = 0;
  std::int64_t generated = 0;
  std::int64_t progress = 0;         // committed tokens since the last reset
  std::int64_t inflight_tokens = 0;  // tokens in the batch currently carrying it
  bool in_flight = false;
  bool decoding_in_flight = false;
  std::optional<double> first_token_ms;
  std::optional<double> completion_ms;
  std::int64_t preemptions = 0;
};

struct Batch {
  MicroBatchPlan plan;
  double stage_ms = 0.0;
  double transfer_ms = 0.0;
  std::vector<double> stage_finish;
};

struct Later {
  bool operator()(const SimEvent& a, const SimEvent& b) const {
    if (a.time_ms != b.time_ms) return a.time_ms > b.time_ms;
    return a.sequence > b.sequence;
  }
};

class Simulation {
 public:
  Simulation(std::span<const RequestSpec> workload, const SchedulerChoice& scheduler,
             const PipelineConfig& pipeline, const KvConfig& kv, const EngineOptions& options)
      : scheduler_(scheduler),
        pipeline_(pipeline),
        options_(options),
        kv_(kv),
        stage_busy_(static_cast<std::size_t>(pipeline.depth), false),
        stage_queue_(static_cast<std::size_t>(pipeline.depth)),
        stage_last_finish_(static_cast<std::size_t>(pipeline.depth), 0.0) {
    scheduler_.validate();
    pipeline_.validate();
    requests_.reserve(workload.size());
    for (const RequestSpec& spec : workload) {
      validate_request(spec);
      LiveRequest r;
      r.spec = spec;
      requests_.push_back(r);
    }
    std::stable_sort(requests_.begin(), requests_.end(),
                     [](const LiveRequest& a, const LiveRequest& b) {
                       return arrives_before(a.spec, b.spec);
                     });
    for (std::size_t i = 0; i < requests_.size(); ++i) {
      const RequestSpec& spec = requests_[i].spec;
      if (!index_.emplace(spec.id, i).second) {
        throw ValidationError("duplicate request id " + std::to_string(spec.id));
      }
      const std::int64_t peak = spec.input_tokens + spec.output_tokens - 1;
      if (pages_for(peak, kv_.page_size()) > kv_.total_pages()) {
        throw UnschedulableError(
            spec.id, "request " + std::to_string(spec.id) + " needs " +
                         std::to_string(pages_for(peak, kv_.page_size())) +
                         " KV pages but the cache has " + std::to_string(kv_.total_pages()));
      }
      push_event(spec.arrival_ms, EventKind::kArrival, -1, -1, spec.id);
    }
  }

  RunResult run() {
    while (!events_.empty()) {
      const double t = events_.top().time_ms;
      if (options_.horizon_ms && t > *options_.horizon_ms) {
        result_.horizon_reached = true;
        break;
      }
      now_ = t;
      while (!events_.empty() && events_.top().time_ms == t) {
        const SimEvent ev = events_.top();
        events_.pop();
        handle(ev);
        if (options_.check_invariants) check_invariants();
      }
      schedule(true);
      if (events_.empty()) break_stall();
      if (options_.check_invariants) check_invariants();
    }
    return finish_result();
  }

 private:
  LiveRequest& at(RequestId id) { return requests_[index_.at(id)]; }

  void push_event(double time, EventKind kind, std::int64_t stage, std::int64_t batch,
                  std::int64_t request) {
    events_.push(SimEvent{time, next_event_seq_++, kind, stage, batch, request});
  }

  void trace(EventKind kind, std::int64_t stage, std::int64_t batch, std::int64_t request,
             std::int64_t prefill, std::int64_t decode) {
    if (!options_.record_events) return;
    result_.events.push_back(TraceRecord{now_, kind, stage, batch, request, prefill, decode});
  }

  void trace_batch(EventKind kind, std::int64_t stage, std::int64_t seq) {
    const MicroBatchPlan& p = batches_.at(seq).plan;
    trace(kind, stage, seq, -1, p.prefill_tokens(), p.decode_tokens());
  }

  void handle(const SimEvent& ev) {
    switch (ev.kind) {
      case EventKind::kArrival: {
        LiveRequest& r = at(static_cast<RequestId>(ev.request));
        r.phase = Phase::kPrefill;
        r.prefill_target = r.spec.input_tokens;
        active_.push_back(index_.at(r.spec.id));
        trace(EventKind::kArrival, -1, -1, ev.request, r.spec.input_tokens, 0);
        break;
      }
      case EventKind::kStageComplete: {
        const auto s = static_cast<std::size_t>(ev.stage);
        trace_batch(EventKind::kStageComplete, ev.stage, ev.batch_seq);
        stage_busy_[s] = false;
        if (ev.stage == pipeline_.depth - 1) {
          commit(ev.batch_seq);
        } else {
          push_event(now_ + batches_.at(ev.batch_seq).transfer_ms, EventKind::kTransferComplete,
                     ev.stage, ev.batch_seq, -1);
        }
        if (!stage_queue_[s].empty()) {
          const std::int64_t next = stage_queue_[s].front();
          stage_queue_[s].pop_front();
          start_stage(ev.stage, next);
        }
        break;
      }
      case EventKind::kTransferComplete: {
        trace_batch(EventKind::kTransferComplete, ev.stage, ev.batch_seq);
        const std::int64_t dst = ev.stage + 1;
        auto& queue = stage_queue_[static_cast<std::size_t>(dst)];
        queue.push_back(ev.batch_seq);
        if (!stage_busy_[static_cast<std::size_t>(dst)]) {
          const std::int64_t next = queue.front();
          queue.pop_front();
          start_stage(dst, next);
        }
        break;
      }
      case EventKind::kSchedulePoint:
      case EventKind::kPreempt:
        break;
    }
  }

  void start_stage(std::int64_t stage, std::int64_t seq) {
    const auto s = static_cast<std::size_t>(stage);
    Batch& b = batches_.at(seq);
    if (options_.check_invariants) {
      if (now_ < stage_last_finish_[s]) {
        throw std::logic_error("stage " + std::to_string(stage) + " started batch " +
                               std::to_string(seq) + " before the previous batch left");
      }
      if (stage > 0 && now_ < b.stage_finish[s - 1] + b.transfer_ms) {
        throw std::logic_error("batch " + std::to_string(seq) + " started stage " +
                               std::to_string(stage) + " before its activations arrived");
      }
    }
    stage_busy_[s] = true;
    const double finish = now_ + b.stage_ms;
    b.stage_finish[s] = finish;
    stage_last_finish_[s] = finish;
    result_.stage_busy.push_back(StageInterval{stage, seq, now_, finish});
    push_event(finish, EventKind::kStageComplete, stage, seq, -1);
  }

  QueueSnapshot snapshot() const {
    QueueSnapshot snap;
    snap.pipeline_depth = pipeline_.depth;
    snap.page_size = kv_.page_size();
    snap.free_pages = kv_.free_pages();
    snap.total_pages = kv_.total_pages();
    for (std::size_t idx : active_) {
      const LiveRequest& r = requests_[idx];
      if (r.phase == Phase::kPrefill) {
        const std::int64_t remaining = r.prefill_target - r.prefilled;
        snap.waiting_prefill_tokens += remaining - (r.in_flight ? r.inflight_tokens : 0);
        if (!r.in_flight) {
          snap.prefill.push_back({r.spec.id, remaining, kv_.tokens_of(r.spec.id)});
        }
      } else if (r.phase == Phase::kDecode) {
        ++snap.running_decode;
        if (!r.in_flight) snap.decode.push_back({r.spec.id, kv_.tokens_of(r.spec.id)});
      }
    }
    return snap;
  }

  MicroBatchPlan make_plan(const QueueSnapshot& snap, bool honor_suspend) const {
    if (scheduler_.policy == Policy::kSarathi) return plan_sarathi(snap, scheduler_.token_budget);
    return plan_throttled(snap, scheduler_.throttle, honor_suspend);
  }

  // Launches one micro-batch if stage 0 can take it. Returns true on launch.
  bool schedule(bool honor_suspend) {
    if (stage_busy_[0] || static_cast<std::int64_t>(batches_.size()) >= pipeline_.depth) {
      return false;
    }
    while (true) {
      const QueueSnapshot snap = snapshot();
      if (snap.prefill.empty() && snap.decode.empty()) return false;
      MicroBatchPlan plan = make_plan(snap, honor_suspend);
      const bool preempted = admit_decodes(plan);
      if (!plan.empty()) {
        for (const PrefillChunk& c : plan.prefill_chunks) {
          if (kv_.allocate(c.id, c.tokens) != AllocResult::kOk) {
            throw std::logic_error("planned prefill chunk does not fit in the KV cache");
          }
        }
        launch(std::move(plan));
        return true;
      }
      if (!preempted) return false;
    }
  }

  // Allocates a KV slot for each planned decode, preempting latest-arrived
  // decode requests on failure. Drops preempted requests from the plan.
  bool admit_decodes(MicroBatchPlan& plan) {
    bool preempted = false;
    std::vector<RequestId> kept;
    std::int64_t context = 0;
    for (RequestId id : plan.decode_ids) {
      if (at(id).phase != Phase::kDecode) continue;
      while (true) {
        if (kv_.allocate(id, 1) == AllocResult::kOk) {
          kept.push_back(id);
          context += kv_.tokens_of(id);
          break;
        }
        std::vector<VictimCandidate> candidates;
        for (std::size_t idx : active_) {
          const LiveRequest& r = requests_[idx];
          if (r.phase != Phase::kDecode || r.in_flight) continue;
          if (std::find(kept.begin(), kept.end(), r.spec.id) != kept.end()) continue;
          candidates.push_back({r.spec.id, r.spec.arrival_ms});
        }
        const RequestId victim = *select_preemption_victim(candidates);
        preempt(victim);
        preempted = true;
        if (victim == id) break;
      }
    }
    plan.decode_ids = std::move(kept);
    plan.decode_context_tokens = context;
    return preempted;
  }

  void preempt(RequestId id) {
    LiveRequest& r = at(id);
    result_.discarded_tokens += r.progress;
    r.progress = 0;
    if (kv_.holds(id)) kv_.release(id);
    r.prefill_target = r.spec.input_tokens + r.generated;
    r.prefilled = 0;
    r.phase = Phase::kPrefill;
    ++r.preemptions;
    ++result_.preemptions;
    trace(EventKind::kPreempt, -1, -1, id, 0, 0);
  }

  void launch(MicroBatchPlan plan) {
    const std::int64_t seq = next_batch_seq_++;
    Batch b;
    b.stage_ms = stage_time(plan, pipeline_.cost);
    b.transfer_ms = pipeline_.depth > 1 ? transfer_time(plan, pipeline_.comm) : 0.0;
    b.stage_finish.assign(static_cast<std::size_t>(pipeline_.depth), 0.0);
    for (RequestId id : plan.decode_ids) {
      LiveRequest& r = at(id);
      r.in_flight = true;
      r.decoding_in_flight = true;
      r.inflight_tokens = 1;
    }
    for (const PrefillChunk& c : plan.prefill_chunks) {
      LiveRequest& r = at(c.id);
      r.in_flight = true;
      r.decoding_in_flight = false;
      r.inflight_tokens = c.tokens;
    }
    result_.iterations.push_back(IterationRecord{seq, now_, plan.prefill_tokens(),
                                                 plan.decode_tokens(), plan.total_tokens()});
    trace(EventKind::kSchedulePoint, 0, seq, -1, plan.prefill_tokens(), plan.decode_tokens());
    b.plan = std::move(plan);
    batches_.emplace(seq, std::move(b));
    start_stage(0, seq);
  }

  void commit(std::int64_t seq) {
    auto node = batches_.extract(seq);
    const MicroBatchPlan& plan = node.mapped().plan;
    for (RequestId id : plan.decode_ids) {
      LiveRequest& r = at(id);
      clear_flight(r);
      ++r.generated;
      ++r.progress;
      if (r.generated >= r.spec.output_tokens) complete(r);
    }
    for (const PrefillChunk& c : plan.prefill_chunks) {
      LiveRequest& r = at(c.id);
      clear_flight(r);
      r.prefilled += c.tokens;
      r.progress += c.tokens;
      if (r.prefilled == r.prefill_target) {
        ++r.generated;
        if (!r.first_token_ms) r.first_token_ms = now_;
        if (r.generated >= r.spec.output_tokens) {
          complete(r);
        } else {
          r.phase = Phase::kDecode;
        }
      }
    }
    result_.committed_tokens += plan.total_tokens();
  }

  static void clear_flight(LiveRequest& r) {
    r.in_flight = false;
    r.decoding_in_flight = false;
    r.inflight_tokens = 0;
  }

  void complete(LiveRequest& r) {
    if (options_.check_invariants &&
        r.progress != r.spec.input_tokens + r.spec.output_tokens - 1) {
      throw std::logic_error("finished request " + std::to_string(r.spec.id) +
                             " processed the wrong number of tokens");
    }
    finished_progress_ += r.progress;
    r.phase = Phase::kFinished;
    r.completion_ms = now_;
    kv_.release(r.spec.id);
    const std::size_t idx = index_.at(r.spec.id);
    active_.erase(std::find(active_.begin(), active_.end(), idx));
  }

  // Nothing is in flight and no event is pending, yet requests remain. This
  // happens when partially prefilled prompts hold the pages the rest of the
  // prefill needs, or when the KV threshold suspends prefill with no decode
  // left to free memory. First retry without the threshold, then evict the
  // latest-arrived page holder until a batch can launch.
  void break_stall() {
    while (!active_.empty() && batches_.empty()) {
      if (schedule(false)) return;
      std::vector<VictimCandidate> holders;
      for (std::size_t idx : active_) {
        const LiveRequest& r = requests_[idx];
        if (kv_.holds(r.spec.id)) holders.push_back({r.spec.id, r.spec.arrival_ms});
      }
      const auto victim = select_preemption_victim(holders);
      if (!victim) throw std::logic_error("simulation stalled with no KV holder to evict");
      preempt(*victim);
    }
  }

  void require_in_flight(RequestId id) const {
    if (!requests_[index_.at(id)].in_flight) {
      throw std::logic_error("batched request " + std::to_string(id) + " not marked in flight");
    }
  }

  void check_invariants() const {
    if (!kv_.consistent()) throw std::logic_error("KV page conservation violated");
    if (static_cast<std::int64_t>(batches_.size()) > pipeline_.depth) {
      throw std::logic_error("more micro-batches in flight than pipeline stages");
    }
    // Every batched id must be an in-flight request, and the number of
    // batched ids must match the number of in-flight requests, so no request
    // rides in two batches.
    std::size_t batched = 0;
    for (const auto& [seq, b] : batches_) {
      batched += b.plan.decode_ids.size() + b.plan.prefill_chunks.size();
      for (RequestId id : b.plan.decode_ids) require_in_flight(id);
      for (const PrefillChunk& c : b.plan.prefill_chunks) require_in_flight(c.id);
    }
    // Pending and finished requests are settled: only active ones can hold
    // pages, and finished ones were checked as they completed.
    std::int64_t progress = finished_progress_;
    std::int64_t held_pages = 0;
    std::size_t in_flight = 0;
    for (std::size_t idx : active_) {
      const LiveRequest& r = requests_[idx];
      const RequestId id = r.spec.id;
      if (r.phase != Phase::kPrefill && r.phase != Phase::kDecode) {
        throw std::logic_error("request " + std::to_string(id) + " listed as active");
      }
      progress += r.progress;
      in_flight += r.in_flight ? 1 : 0;
      // Untouched waiting prompts are covered by the page total below.
      if (r.progress == 0 && !r.in_flight) continue;
      const std::int64_t expected = r.progress + (r.in_flight ? r.inflight_tokens : 0);
      if (kv_.tokens_of(id) != expected) {
        throw std::logic_error("request " + std::to_string(id) +
                               " KV tokens disagree with its progress");
      }
      held_pages += kv_.pages_of(id);
    }
    if (in_flight != batched) throw std::logic_error("request in two in-flight batches");
    if (held_pages != kv_.allocated_pages()) {
      throw std::logic_error("KV pages held by pending or finished requests");
    }
    if (result_.committed_tokens != progress + result_.discarded_tokens) {
      throw std::logic_error("token conservation violated");
    }
  }

  RunResult finish_result() {
    result_.depth = pipeline_.depth;
    result_.requests.reserve(requests_.size());
    for (const LiveRequest& r : requests_) {
      result_.requests.push_back(RequestRecord{r.spec.id, r.spec.arrival_ms, r.first_token_ms,
                                               r.completion_ms, r.spec.input_tokens,
                                               r.spec.output_tokens, r.preemptions});
    }
    for (const StageInterval& iv : result_.stage_busy) {
      result_.makespan_ms = std::max(result_.makespan_ms, iv.finish_ms);
    }
    return std::move(result_);
  }

  SchedulerChoice scheduler_;
  PipelineConfig pipeline_;
  EngineOptions options_;
  KvCache kv_;

  std::vector<LiveRequest> requests_;  // FCFS order
  std::unordered_map<RequestId, std::size_t> index_;
  std::vector<std::size_t> active_;  // arrived and unfinished, FCFS order
  std::int64_t finished_progress_ = 0;

  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> events_;
  std::uint64_t next_event_seq_ = 0;
  double now_ = 0.0;

  std::map<std::int64_t, Batch> batches_;  // in flight, by sequence
  std::int64_t next_batch_seq_ = 0;
  std::vector<bool> stage_busy_;
  std::vector<std::deque<std::int64_t>> stage_queue_;
  std::vector<double> stage_last_finish_;

  RunResult result_;
};

}  // namespace

RunResult run(std::span<const RequestSpec> workload, const SchedulerChoice& scheduler,
              const PipelineConfig& pipeline, const KvConfig& kv, const EngineOptions& options) {
  Simulation sim(workload, scheduler, pipeline, kv, options);
  return sim.run();
}

std::vector<double> bubble_accounting(std::span<const StageInterval> busy, std::int64_t depth,
                                      double makespan_ms) {
  std::vector<std::vector<std::pair<double, double>>> per_stage(static_cast<std::size_t>(depth));
  for (const StageInterval& iv : busy) {
    if (iv.stage < 0 || iv.stage >= depth) throw std::logic_error("interval on unknown stage");
    per_stage[static_cast<std::size_t>(iv.stage)].emplace_back(iv.start_ms, iv.finish_ms);
  }
  std::vector<double> idle;
  idle.reserve(per_stage.size());
  for (auto& intervals : per_stage) {
    std::sort(intervals.begin(), intervals.end());
    double total = 0.0;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      if (i > 0 && intervals[i].first < intervals[i - 1].second) {
        throw std::logic_error("overlapping busy intervals on one stage");
      }
      total += intervals[i].second - intervals[i].first;
    }
    if (makespan_ms <= 0.0) {
      idle.push_back(0.0);
    } else {
      idle.push_back(std::clamp((makespan_ms - total) / makespan_ms, 0.0, 1.0));
    }
  }
  return idle;
}

void write_event_trace(std::ostream& out, std::span<const TraceRecord> events) {
  out << "time_ms,kind,stage,batch_seq,request,prefill_tokens,decode_tokens\n";
  for (const TraceRecord& e : events) {
    out << format_double(e.time_ms) << ',' << to_string(e.kind) << ',' << e.stage << ','
        << e.batch_seq << ',' << e.request << ',' << e.prefill_tokens << ',' << e.decode_tokens
        << '\n';
  }
}

}  // namespace ttsim
