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

#include "ttsim/workload.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"
#include "ttsim/errors.hpp"
#include "ttsim/random.hpp"

namespace ttsim {
namespace {

constexpr std::array<LengthPair, 20> kSharegptLike{{
    {12, 9},    {25, 22},   {38, 40},   {54, 57},   {67, 75},   {83, 91},   {96, 108},
    {112, 126}, {130, 140}, {148, 155}, {165, 170}, {184, 188}, {205, 204}, {231, 221},
    {262, 240}, {298, 262}, {345, 290}, {410, 320}, {498, 370}, {637, 512},
}};

constexpr std::array<LengthPair, 20> kAzureLike{{
    {96, 18},     {180, 40},    {260, 70},    {340, 100},   {430, 130},   {520, 160},
    {610, 190},   {700, 220},   {790, 250},   {880, 280},   {980, 310},   {1080, 340},
    {1190, 370},  {1300, 400},  {1420, 430},  {1560, 460},  {1720, 500},  {1910, 540},
    {2150, 600},  {2724, 568},
}};

std::int64_t clamp_tokens(std::int64_t v, const TokenBounds& b) {
  return std::clamp(v, b.min, b.max);
}

std::int64_t lognormal_draw(Rng& rng, double mean, double sigma) {
  const double mu = std::log(mean) - 0.5 * sigma * sigma;
  return std::llround(std::exp(mu + sigma * rng.normal()));
}

void check_bounds(const TokenBounds& b, const char* which) {
  if (b.min < 1 || b.max < b.min) {
    throw ConfigError(std::string("invalid ") + which + " length bounds");
  }
}

std::int64_t read_count(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw TraceParseError(line, std::string("missing field ") + key);
  if (!it->is_number_integer()) {
    throw TraceParseError(line, std::string("field ") + key + " must be an integer");
  }
  return it->get<std::int64_t>();
}

}  // namespace

LengthDistribution LengthDistribution::fixed_lengths(std::int64_t input, std::int64_t output) {
  LengthDistribution d;
  d.kind = Kind::kFixed;
  d.fixed = {input, output};
  return d;
}

LengthDistribution LengthDistribution::empirical(std::vector<LengthPair> table) {
  LengthDistribution d;
  d.kind = Kind::kEmpirical;
  d.table = std::move(table);
  return d;
}

LengthDistribution LengthDistribution::lognormal(double input_mean, double input_sigma,
                                                 double output_mean, double output_sigma) {
  LengthDistribution d;
  d.kind = Kind::kLognormal;
  d.input_mean = input_mean;
  d.input_sigma = input_sigma;
  d.output_mean = output_mean;
  d.output_sigma = output_sigma;
  return d;
}

ArrivalProcess ArrivalProcess::poisson(double rate_per_s, std::uint64_t seed) {
  ArrivalProcess p;
  p.kind = Kind::kPoisson;
  p.rate_per_s = rate_per_s;
  p.seed = seed;
  return p;
}

ArrivalProcess ArrivalProcess::trace(std::vector<double> times_ms) {
  ArrivalProcess p;
  p.kind = Kind::kTrace;
  p.times_ms = std::move(times_ms);
  return p;
}

std::span<const LengthPair> sharegpt_like_table() { return kSharegptLike; }
std::span<const LengthPair> azure_like_table() { return kAzureLike; }

std::vector<double> generate_arrivals(const ArrivalProcess& process, std::size_t n) {
  std::vector<double> times;
  if (process.kind == ArrivalProcess::Kind::kTrace) {
    if (!std::is_sorted(process.times_ms.begin(), process.times_ms.end())) {
      throw ConfigError("trace arrival times must be non-decreasing");
    }
    if (process.times_ms.size() < n) {
      throw ConfigError("trace has " + std::to_string(process.times_ms.size()) +
                        " arrivals, " + std::to_string(n) + " requested");
    }
    if (!process.times_ms.empty() && process.times_ms.front() < 0.0) {
      throw ConfigError("trace arrival times must be non-negative");
    }
    times.assign(process.times_ms.begin(), process.times_ms.begin() + static_cast<long>(n));
    return times;
  }

  if (!(process.rate_per_s > 0.0) || !std::isfinite(process.rate_per_s)) {
    throw ConfigError("poisson rate must be positive");
  }
  Rng rng(process.seed);
  const double rate_per_ms = process.rate_per_s / 1000.0;
  times.reserve(n);
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    t += rng.exponential(rate_per_ms);
    times.push_back(t);
  }
  return times;
}

std::vector<LengthPair> sample_lengths(const LengthDistribution& dist, std::size_t n,
                                       std::uint64_t seed) {
  check_bounds(dist.input_bounds, "input");
  check_bounds(dist.output_bounds, "output");
  std::vector<LengthPair> out;
  out.reserve(n);
  Rng rng(seed);
  switch (dist.kind) {
    case LengthDistribution::Kind::kFixed:
      for (std::size_t i = 0; i < n; ++i) {
        out.push_back(dist.fixed);
      }
      break;
    case LengthDistribution::Kind::kEmpirical:
      if (dist.table.empty()) throw ConfigError("empirical length table is empty");
      for (std::size_t i = 0; i < n; ++i) {
        const LengthPair& row = dist.table[rng.below(dist.table.size())];
        out.push_back({clamp_tokens(row.input, dist.input_bounds),
                       clamp_tokens(row.output, dist.output_bounds)});
      }
      break;
    case LengthDistribution::Kind::kLognormal:
      if (!(dist.input_mean > 0.0) || !(dist.output_mean > 0.0) || dist.input_sigma < 0.0 ||
          dist.output_sigma < 0.0) {
        throw ConfigError("lognormal means must be positive and sigmas non-negative");
      }
      for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t in = lognormal_draw(rng, dist.input_mean, dist.input_sigma);
        const std::int64_t o = lognormal_draw(rng, dist.output_mean, dist.output_sigma);
        out.push_back({clamp_tokens(in, dist.input_bounds), clamp_tokens(o, dist.output_bounds)});
      }
      break;
  }
  return out;
}

std::vector<RequestSpec> synthesize(const ArrivalProcess& process, const LengthDistribution& dist,
                                    std::size_t n, std::uint64_t seed) {
  ArrivalProcess arrivals = process;
  if (arrivals.kind == ArrivalProcess::Kind::kPoisson) arrivals.seed = derive_seed(seed, 0);
  const std::vector<double> times = generate_arrivals(arrivals, n);
  const std::vector<LengthPair> lengths = sample_lengths(dist, n, derive_seed(seed, 1));
  std::vector<RequestSpec> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({static_cast<RequestId>(i), times[i], lengths[i].input, lengths[i].output});
  }
  return out;
}

void validate_request(const RequestSpec& r) {
  if (r.input_tokens < 1) {
    throw ValidationError("request " + std::to_string(r.id) + ": input_tokens must be >= 1");
  }
  if (r.output_tokens < 1) {
    throw ValidationError("request " + std::to_string(r.id) + ": output_tokens must be >= 1");
  }
  if (!(r.arrival_ms >= 0.0) || !std::isfinite(r.arrival_ms)) {
    throw ValidationError("request " + std::to_string(r.id) + ": arrival_ms must be >= 0");
  }
}

bool arrives_before(const RequestSpec& a, const RequestSpec& b) {
  if (a.arrival_ms != b.arrival_ms) return a.arrival_ms < b.arrival_ms;
  return a.id < b.id;
}

std::vector<RequestSpec> parse_trace(std::istream& in) {
  std::vector<RequestSpec> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw TraceParseError(line, e.what());
    }
    if (!obj.is_object()) throw TraceParseError(line, "expected a JSON object");
    auto arrival = obj.find("arrival_ms");
    if (arrival == obj.end() || !arrival->is_number()) {
      throw TraceParseError(line, "field arrival_ms must be a number");
    }
    RequestSpec r;
    r.id = static_cast<RequestId>(out.size());
    r.arrival_ms = arrival->get<double>();
    r.input_tokens = read_count(obj, "input_tokens", line);
    r.output_tokens = read_count(obj, "output_tokens", line);
    try {
      validate_request(r);
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line) + ": " + e.what());
    }
    out.push_back(r);
  }
  std::stable_sort(out.begin(), out.end(), arrives_before);
  return out;
}

std::vector<RequestSpec> load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file " + path.string());
  return parse_trace(in);
}

void write_trace(std::ostream& out, std::span<const RequestSpec> requests) {
  for (const RequestSpec& r : requests) {
    nlohmann::ordered_json obj;
    obj["arrival_ms"] = r.arrival_ms;
    obj["input_tokens"] = r.input_tokens;
    obj["output_tokens"] = r.output_tokens;
    out << obj.dump() << '\n';
  }
}

}  // namespace ttsim
