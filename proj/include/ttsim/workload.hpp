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
#include <iosfwd>
#include <span>
#include <vector>

namespace ttsim {

using RequestId = std::uint32_t;

/// One serving request as it enters the system.
///
/// `output_tokens` counts every generated token, including the one emitted
/// when the final prefill chunk completes, so a request runs exactly
/// `output_tokens - 1` decode iterations.
struct RequestSpec {
  RequestId id = 0;
  double arrival_ms = 0.0;
  std::int64_t input_tokens = 1;
  std::int64_t output_tokens = 1;

  bool operator==(const RequestSpec&) const = default;
};

struct LengthPair {
  std::int64_t input = 1;
  std::int64_t output = 1;

  bool operator==(const LengthPair&) const = default;
};

struct TokenBounds {
  std::int64_t min = 1;
  std::int64_t max = 1 << 20;
};

/// Prompt/output length distribution with per-dimension clamps.
struct LengthDistribution {
  enum class Kind { kFixed, kEmpirical, kLognormal };

  Kind kind = Kind::kFixed;
  LengthPair fixed;
  std::vector<LengthPair> table;
  // Lognormal parameters: the mean of the distribution itself (not of its
  // logarithm) and the standard deviation of the underlying normal.
  double input_mean = 0.0;
  double input_sigma = 0.0;
  double output_mean = 0.0;
  double output_sigma = 0.0;
  // Clamp sampled lengths; fixed lengths are used as given.
  TokenBounds input_bounds;
  TokenBounds output_bounds;

  static LengthDistribution fixed_lengths(std::int64_t input, std::int64_t output);
  static LengthDistribution empirical(std::vector<LengthPair> table);
  static LengthDistribution lognormal(double input_mean, double input_sigma, double output_mean,
                                      double output_sigma);
};

struct ArrivalProcess {
  enum class Kind { kPoisson, kTrace };

  Kind kind = Kind::kPoisson;
  double rate_per_s = 1.0;
  std::vector<double> times_ms;
  std::uint64_t seed = 0;

  static ArrivalProcess poisson(double rate_per_s, std::uint64_t seed);
  static ArrivalProcess trace(std::vector<double> times_ms);
};

// Short-prompt conversational table. Means: input 200, output 180.
std::span<const LengthPair> sharegpt_like_table();
// Long-prompt production-style table. Means are 5.21x (input) and 1.66x
// (output) those of sharegpt_like_table().
std::span<const LengthPair> azure_like_table();

/// Arrival times in ms, non-decreasing, first gap measured from t = 0.
/// Throws ConfigError for a non-positive rate, an unsorted trace, or a trace
/// shorter than n.
std::vector<double> generate_arrivals(const ArrivalProcess& process, std::size_t n);

/// Throws ConfigError for an empty empirical table or inverted bounds.
std::vector<LengthPair> sample_lengths(const LengthDistribution& dist, std::size_t n,
                                       std::uint64_t seed);

/// Arrivals and lengths drawn from independent streams derived from `seed`.
std::vector<RequestSpec> synthesize(const ArrivalProcess& process, const LengthDistribution& dist,
                                    std::size_t n, std::uint64_t seed);

// Line-delimited JSON trace: {"arrival_ms":..,"input_tokens":..,"output_tokens":..}.
// Blank lines are skipped and unknown fields ignored. Ids follow line order;
// the result is stably sorted by arrival.
std::vector<RequestSpec> parse_trace(std::istream& in);
std::vector<RequestSpec> load_trace(const std::filesystem::path& path);
void write_trace(std::ostream& out, std::span<const RequestSpec> requests);

void validate_request(const RequestSpec& r);

// FCFS order: arrival time, then id.
bool arrives_before(const RequestSpec& a, const RequestSpec& b);

}  // namespace ttsim
