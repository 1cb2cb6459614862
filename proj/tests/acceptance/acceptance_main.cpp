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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Expected values measured on the bundled fixture are
// pinned below together with their tolerances.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "reference_formulas.hpp"
#include "stepped_sim.hpp"
#include "ttsim/errors.hpp"
#include "ttsim/metrics.hpp"
#include "ttsim/runner.hpp"

namespace {

using namespace ttsim;
using namespace ttsim::testing;
namespace fs = std::filesystem;

// Runtime ceilings per criterion, in seconds.
constexpr double kLimitFormulas = 1.0;
constexpr double kLimitDecodeBalance = 5.0;
constexpr double kLimitOracle = 10.0;
constexpr double kLimitFluctuation = 30.0;
constexpr double kLimitBubbles = 30.0;
constexpr double kLimitSensitivity = 120.0;
constexpr double kLimitDeterminism = 60.0;
constexpr double kLimitConservation = 120.0;

// Pinned fixture measurements. Relative tolerance for every pinned float.
constexpr double kPinTol = 1e-6;
constexpr double kFluctuationRatio = 0.201615141481609;  // throttle stddev / sarathi stddev
constexpr double kThrottleBubbleMean = 0.05455606178567729;
constexpr double kSarathiBubbleMean = 0.3898910734620798;
constexpr double kTpotByT[] = {24.688884152736382, 23.690427773555445, 23.271262924559572,
                               22.992088080915369};  // T = 1, 4, 8, 16
constexpr double kTtftByT[] = {77.326091758182358, 95.340200074156755, 114.50589427967502,
                               151.55596283687149};
constexpr std::int64_t kPreemptionsThresh0 = 8;
constexpr std::int64_t kPreemptionsThresh005 = 2;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && out_.pass) {
      out_.pass = false;
      out_.detail = what;
    }
  }
  void note(const std::string& what) {
    if (out_.pass) out_.detail = what;
  }
  Outcome result() const { return out_; }

 private:
  Outcome out_;
};

bool near_pinned(double got, double pinned) {
  return std::abs(got - pinned) <= kPinTol * std::max(1.0, std::abs(pinned));
}

std::string num(double v) {
  std::ostringstream ss;
  ss.precision(10);
  ss << v;
  return ss.str();
}

const std::vector<RequestSpec>& fixture() {
  static const std::vector<RequestSpec> w = load_trace(data_dir() / "bursty_fixture.jsonl");
  return w;
}

Report run_fixture(const SchedulerChoice& choice, EngineOptions opts = {}) {
  return summarize(run(fixture(), choice, fixture_pipeline(), fixture_kv(), opts), SloLimits{});
}

Outcome formulas() {
  Check c;
  ThrottleConfig cfg;
  cfg.iterations = 8;
  cfg.min_p = 32;
  cfg.max_p = 2048;
  cfg.kv_thresh = 0.05;
  c.expect(throttle_prefill_wt(16384, cfg) == 2048, "wt(16384)");
  c.expect(throttle_prefill_wt(0, cfg) == 0, "wt(0)");
  c.expect(throttle_prefill_wt(100, cfg) == 32, "wt(100)");
  c.expect(throttle_prefill_ut(1.0, cfg) == 2048, "ut(1.0)");
  c.expect(throttle_prefill_ut(0.0, cfg) == 32, "ut(0.0)");
  c.expect(throttle_prefill_ut(0.5, cfg) == 1024, "ut(0.5)");
  c.expect(throttle_prefill_combined(100000, 0.525, cfg) == 1024, "combined(100000, 0.525)");
  c.expect(throttle_prefill_combined(16384, 0.05, cfg) == 0, "combined(16384, 0.05)");
  c.expect(throttle_prefill_combined(16384, 1.0, cfg) == 2048, "combined(16384, 1.0)");
  c.expect(throttle_decode(12, 4) == 3, "decode(12, 4)");
  c.expect(throttle_decode(0, 4) == 0, "decode(0, 4)");
  c.expect(throttle_decode(10, 4) == 3, "decode(10, 4)");

  Rng rng(0xacce97);
  int mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    ThrottleConfig r;
    r.iterations = 1 + static_cast<std::int64_t>(rng.below(64));
    r.min_p = 1 + static_cast<std::int64_t>(rng.below(512));
    r.max_p = r.min_p + static_cast<std::int64_t>(rng.below(8192));
    r.kv_thresh = rng.below(4) == 0 ? 0.0 : rng.uniform() * 0.5;
    const auto wp = static_cast<std::int64_t>(rng.below(1u << 20));
    const double kv = rng.below(8) == 0 ? static_cast<double>(rng.below(2)) : rng.uniform();
    const auto rd = static_cast<std::int64_t>(rng.below(4096));
    const auto depth = 1 + static_cast<std::int64_t>(rng.below(16));
    mismatches += throttle_prefill_wt(wp, r) != ref_prefill_wt(wp, r.iterations, r.min_p, r.max_p);
    mismatches += throttle_prefill_ut(kv, r) != ref_prefill_ut(kv, r.min_p, r.max_p);
    mismatches += throttle_prefill_combined(wp, kv, r) !=
                  ref_prefill_combined(wp, kv, r.iterations, r.min_p, r.max_p, r.kv_thresh);
    mismatches += throttle_decode(rd, depth) != ref_decode(rd, depth);
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " mismatches in 10000 random inputs");
  c.note("12 examples, 10000 random inputs, 0 mismatches");
  return c.result();
}

Outcome decode_balance() {
  Check c;
  Rng rng(0xba1a);
  for (int i = 0; i < 200; ++i) {
    const auto r = 1 + static_cast<std::int64_t>(rng.below(4096));
    const auto depth = 1 + static_cast<std::int64_t>(rng.below(16));
    QueueSnapshot s;
    s.pipeline_depth = depth;
    s.running_decode = r;
    s.page_size = 16;
    s.total_pages = s.free_pages = 1 << 20;
    for (RequestId id = 0; id < r; ++id) s.decode.push_back({id, 128});
    std::vector<std::int64_t> counts;
    std::vector<bool> seen(static_cast<std::size_t>(r), false);
    while (!s.decode.empty() && counts.size() <= static_cast<std::size_t>(depth)) {
      const auto plan = plan_throttled(s, ThrottleConfig{});
      for (RequestId id : plan.decode_ids) {
        c.expect(!seen[id], "request scheduled twice in one round");
        seen[id] = true;
      }
      counts.push_back(plan.decode_tokens());
      s.decode.erase(s.decode.begin(), s.decode.begin() + plan.decode_tokens());
    }
    const std::string where = "R=" + std::to_string(r) + " depth=" + std::to_string(depth);
    c.expect(s.decode.empty(), where + ": round did not cover the population");
    c.expect(static_cast<std::int64_t>(counts.size()) <= depth, where + ": more batches than depth");
    for (std::size_t k = 0; k + 1 < counts.size(); ++k) {
      c.expect(counts[k] == counts[0], where + ": unequal full batches");
    }
    c.expect(counts.back() <= counts[0] && counts.back() >= 1, where + ": bad final batch");
  }
  c.note("200 (R, depth) pairs partition R with equal batches plus one remainder");
  return c.result();
}

Outcome oracle() {
  Check c;
  Rng rng(0x0c1e);
  for (int i = 0; i < 50; ++i) {
    const SmallCase sc = random_small_case(rng);
    const RunResult r = run(sc.workload, sc.scheduler, sc.pipeline, sc.kv);
    const SteppedResult o = stepped_simulate(sc.workload, sc.scheduler, sc.pipeline, sc.kv);
    auto busy = r.stage_busy;
    std::sort(busy.begin(), busy.end(), [](const StageInterval& a, const StageInterval& b) {
      return std::tie(a.batch_seq, a.stage) < std::tie(b.batch_seq, b.stage);
    });
    const std::string where = "case " + std::to_string(i);
    c.expect(busy == o.intervals, where + ": stage intervals differ");
    c.expect(r.requests.size() == o.requests.size(), where + ": request count differs");
    for (std::size_t k = 0; k < std::min(r.requests.size(), o.requests.size()); ++k) {
      c.expect(r.requests[k].first_token_ms == o.requests[k].first_token_ms &&
                   r.requests[k].completion_ms == o.requests[k].completion_ms,
               where + ": request times differ");
    }
  }
  c.note("50 random configurations match the 1 ms stepped simulator exactly");
  return c.result();
}

Outcome fluctuation() {
  Check c;
  const Report t = run_fixture(throttle_choice());
  const Report s = run_fixture(sarathi_choice(2048));
  const double ratio = *t.token_stddev / *s.token_stddev;
  c.expect(*t.token_stddev < *s.token_stddev, "throttled stddev not below sarathi");
  c.expect(near_pinned(ratio, kFluctuationRatio),
           "ratio " + num(ratio) + " differs from pinned " + num(kFluctuationRatio));
  c.note("stddev " + num(*t.token_stddev) + " vs " + num(*s.token_stddev) + ", ratio " +
         num(ratio));
  return c.result();
}

Outcome bubbles() {
  Check c;
  const Report t = run_fixture(throttle_choice());
  const Report s = run_fixture(sarathi_choice(2048));
  c.expect(t.bubble_mean < s.bubble_mean, "throttled bubbles not below sarathi");
  c.expect(near_pinned(t.bubble_mean, kThrottleBubbleMean),
           "throttled bubble mean " + num(t.bubble_mean) + " differs from pinned");
  c.expect(near_pinned(s.bubble_mean, kSarathiBubbleMean),
           "sarathi bubble mean " + num(s.bubble_mean) + " differs from pinned");
  c.note("mean idle fraction " + num(t.bubble_mean) + " vs " + num(s.bubble_mean));
  return c.result();
}

Outcome sensitivity() {
  Check c;
  const std::int64_t ts[] = {1, 4, 8, 16};
  double tpot[4], ttft[4];
  for (int i = 0; i < 4; ++i) {
    ThrottleConfig cfg;
    cfg.iterations = ts[i];
    const Report r = run_fixture(throttle_choice(cfg));
    tpot[i] = *r.tpot_mean_ms;
    ttft[i] = *r.ttft_mean_ms;
    c.expect(near_pinned(tpot[i], kTpotByT[i]),
             "T=" + std::to_string(ts[i]) + " TPOT " + num(tpot[i]) + " differs from pinned");
    c.expect(near_pinned(ttft[i], kTtftByT[i]),
             "T=" + std::to_string(ts[i]) + " TTFT " + num(ttft[i]) + " differs from pinned");
  }
  for (int i = 1; i < 4; ++i) c.expect(tpot[i] <= tpot[i - 1], "TPOT rises with T");
  for (int i = 2; i < 4; ++i) c.expect(ttft[i] >= ttft[i - 1], "TTFT falls with T beyond 4");

  std::int64_t pre[2];
  const double thresholds[] = {0.0, 0.05};
  for (int i = 0; i < 2; ++i) {
    ThrottleConfig cfg;
    cfg.kv_thresh = thresholds[i];
    pre[i] = run_fixture(throttle_choice(cfg)).preemptions;
  }
  c.expect(pre[0] >= pre[1], "more preemptions with a threshold than without");
  c.expect(pre[0] == kPreemptionsThresh0 && pre[1] == kPreemptionsThresh005,
           "preemptions " + std::to_string(pre[0]) + "/" + std::to_string(pre[1]) +
               " differ from pinned");
  std::ostringstream d;
  d << "TPOT";
  for (double v : tpot) d << ' ' << num(v);
  d << ", TTFT";
  for (double v : ttft) d << ' ' << num(v);
  d << ", preemptions " << pre[0] << " >= " << pre[1];
  c.note(d.str());
  return c.result();
}

std::vector<std::pair<std::string, std::string>> tree_contents(const fs::path& root) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out.emplace_back(fs::relative(e.path(), root).string(), ss.str());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Outcome determinism() {
  Check c;
  const fs::path base = fs::temp_directory_path() / "ttsim_acceptance_determinism";
  fs::remove_all(base);
  std::vector<std::pair<std::string, std::string>> trees[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path dir = base / std::to_string(i);
    const RunConfig cfg = load_config(data_dir() / "tiny_config.json",
                                      {{"run.out_dir", dir.string()},
                                       {"run.threads", i == 0 ? "1" : "4"},
                                       {"workload.num_requests", "300"},
                                       {"run.rates", "2,8,32"},
                                       {"run.events_log", "true"},
                                       {"run.schedulers",
                                        "throttle,throttle-wt-only,throttle-ut-only,sarathi"}});
    for (const RunOutcome& o : run_sweep(cfg)) c.expect(o.ok(), o.name + ": " + o.error);
    trees[i] = tree_contents(dir);
  }
  fs::remove_all(base);
  c.expect(!trees[0].empty(), "sweep wrote nothing");
  c.expect(trees[0] == trees[1], "sweep outputs differ between invocations");
  c.note(std::to_string(trees[0].size()) + " files byte-identical across two sweeps");
  return c.result();
}

Outcome conservation() {
  Check c;
  Rng rng(0xc0de);
  std::int64_t preemptions = 0;
  std::size_t requests = 0;
  static constexpr std::string_view kNames[] = {"throttle", "throttle-wt-only",
                                                "throttle-ut-only", "sarathi"};
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 50 + rng.below(451);
    const double rate = 1.0 + rng.uniform() * 40.0;
    LengthDistribution dist;
    switch (rng.below(3)) {
      case 0: dist = LengthDistribution::empirical({sharegpt_like_table().begin(),
                                                    sharegpt_like_table().end()}); break;
      case 1: dist = LengthDistribution::empirical({azure_like_table().begin(),
                                                    azure_like_table().end()}); break;
      default: dist = LengthDistribution::lognormal(300, 1.0, 150, 0.8); break;
    }
    dist.input_bounds = {1, 3000};
    dist.output_bounds = {1, 1000};
    const auto workload = synthesize(ArrivalProcess::poisson(rate, rng.next()), dist, n, rng.next());

    ThrottleConfig t;
    t.iterations = 1 + static_cast<std::int64_t>(rng.below(16));
    t.min_p = 1 + static_cast<std::int64_t>(rng.below(64));
    t.max_p = t.min_p + static_cast<std::int64_t>(rng.below(4096));
    t.kv_thresh = rng.below(3) == 0 ? 0.0 : rng.uniform() * 0.2;
    const auto choice = SchedulerChoice::from_name(kNames[rng.below(4)], t,
                                                   64 + static_cast<std::int64_t>(rng.below(4000)));
    PipelineConfig p;
    p.depth = 1 + static_cast<std::int64_t>(rng.below(8));
    if (rng.below(2) == 0) p.comm = CommModel::network();
    KvConfig kv;
    kv.page_size = std::int64_t{8} << rng.below(3);
    kv.total_pages = (4000 + static_cast<std::int64_t>(rng.below(60000))) / kv.page_size;

    EngineOptions opts;
    opts.check_invariants = true;
    const std::string where = "run " + std::to_string(i);
    try {
      const RunResult r = run(workload, choice, p, kv, opts);
      std::int64_t done = 0;
      for (const RequestRecord& q : r.requests) {
        c.expect(q.finished(), where + ": request left unfinished");
        done += q.input_tokens + q.output_tokens - 1;
      }
      c.expect(r.committed_tokens == done + r.discarded_tokens, where + ": token totals differ");
      std::int64_t scheduled = 0;
      for (const IterationRecord& it : r.iterations) scheduled += it.total_tokens;
      c.expect(scheduled == r.committed_tokens, where + ": iteration totals differ");
      bubble_accounting(r.stage_busy, r.depth, r.makespan_ms);
      preemptions += r.preemptions;
      requests += r.requests.size();
    } catch (const UnschedulableError&) {
      c.expect(false, where + ": generated an unschedulable workload");
    } catch (const std::exception& e) {
      c.expect(false, where + ": " + e.what());
    }
  }
  c.note("100 runs, " + std::to_string(requests) + " requests, " + std::to_string(preemptions) +
         " preemptions, invariants held at every event");
  return c.result();
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit_s;
    std::function<Outcome()> fn;
  };
  const Criterion criteria[] = {
      {"formula exactness", kLimitFormulas, formulas},
      {"decode balance", kLimitDecodeBalance, decode_balance},
      {"stepped oracle", kLimitOracle, oracle},
      {"fluctuation reduction", kLimitFluctuation, fluctuation},
      {"bubble reduction", kLimitBubbles, bubbles},
      {"sensitivity trends", kLimitSensitivity, sensitivity},
      {"determinism", kLimitDeterminism, determinism},
      {"conservation", kLimitConservation, conservation},
  };
  int failed = 0;
  int index = 0;
  for (const Criterion& cr : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.pass && secs > cr.limit_s) {
      o = {false, "took " + num(secs) + " s, limit " + num(cr.limit_s) + " s"};
    }
    failed += !o.pass;
    std::printf("[%s] %d %s (%.3f s): %s\n", o.pass ? "PASS" : "FAIL", index, cr.name, secs,
                o.detail.c_str());
  }
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
