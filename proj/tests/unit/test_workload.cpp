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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ttsim/errors.hpp"
#include "ttsim/workload.hpp"

namespace ttsim {
namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

TEST(Arrivals, EmptyRequestSet) {
  EXPECT_TRUE(generate_arrivals(ArrivalProcess::poisson(3.0, 7), 0).empty());
}

TEST(Arrivals, PoissonMeanGap) {
  const auto t = generate_arrivals(ArrivalProcess::poisson(2.0, 1), 10000);
  ASSERT_EQ(t.size(), 10000u);
  EXPECT_TRUE(std::is_sorted(t.begin(), t.end()));
  std::vector<double> gaps(t.size());
  std::adjacent_difference(t.begin(), t.end(), gaps.begin());
  const double m = mean_of(gaps);
  EXPECT_NEAR(m, 500.0, 25.0);
}

// Kolmogorov-Smirnov distance of the gaps from Exp(mean 500 ms). The 1%
// critical value for n = 10000 is 1.628 / sqrt(n).
TEST(Arrivals, PoissonGapsAreExponential) {
  const auto t = generate_arrivals(ArrivalProcess::poisson(2.0, 1), 10000);
  std::vector<double> gaps(t.size());
  std::adjacent_difference(t.begin(), t.end(), gaps.begin());
  std::sort(gaps.begin(), gaps.end());
  const double n = static_cast<double>(gaps.size());
  double d = 0.0;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const double cdf = 1.0 - std::exp(-gaps[i] / 500.0);
    d = std::max({d, (i + 1) / n - cdf, cdf - i / n});
  }
  EXPECT_LT(d, 1.628 / std::sqrt(n));
}

TEST(Arrivals, NonPositiveRate) {
  EXPECT_THROW(generate_arrivals(ArrivalProcess::poisson(0.0, 1), 5), ConfigError);
  EXPECT_THROW(generate_arrivals(ArrivalProcess::poisson(-1.0, 1), 5), ConfigError);
}

TEST(Arrivals, UnsortedTrace) {
  EXPECT_THROW(generate_arrivals(ArrivalProcess::trace({0, 100, 50}), 3), ConfigError);
}

TEST(Arrivals, TraceReplay) {
  const auto t = generate_arrivals(ArrivalProcess::trace({0, 50, 100}), 2);
  EXPECT_EQ(t, (std::vector<double>{0, 50}));
}

TEST(Arrivals, SameSeedSameTimes) {
  EXPECT_EQ(generate_arrivals(ArrivalProcess::poisson(4.0, 11), 500),
            generate_arrivals(ArrivalProcess::poisson(4.0, 11), 500));
  EXPECT_NE(generate_arrivals(ArrivalProcess::poisson(4.0, 11), 500),
            generate_arrivals(ArrivalProcess::poisson(4.0, 12), 500));
}

TEST(Lengths, Fixed) {
  const auto v = sample_lengths(LengthDistribution::fixed_lengths(128, 64), 3, 1);
  EXPECT_EQ(v, (std::vector<LengthPair>(3, LengthPair{128, 64})));
}

TEST(Lengths, SingleRowTable) {
  const auto v = sample_lengths(LengthDistribution::empirical({{7, 9}}), 2, 1);
  EXPECT_EQ(v, (std::vector<LengthPair>(2, LengthPair{7, 9})));
}

TEST(Lengths, EmptyTable) {
  EXPECT_THROW(sample_lengths(LengthDistribution::empirical({}), 2, 1), ConfigError);
}

TEST(Lengths, LognormalMean) {
  const auto v = sample_lengths(LengthDistribution::lognormal(200, 0.8, 180, 0.6), 10000, 3);
  double in = 0, out = 0;
  for (const auto& p : v) {
    in += p.input;
    out += p.output;
    EXPECT_GE(p.input, 1);
    EXPECT_GE(p.output, 1);
  }
  EXPECT_NEAR(in / 10000.0, 200.0, 20.0);
  EXPECT_NEAR(out / 10000.0, 180.0, 18.0);
}

TEST(Lengths, EmpiricalCoversTable) {
  const auto table = sharegpt_like_table();
  const auto v = sample_lengths(LengthDistribution::empirical({table.begin(), table.end()}),
                                5000, 9);
  for (const auto& p : v) {
    EXPECT_NE(std::find(table.begin(), table.end(), p), table.end());
  }
}

// The long-context table scales the conversational means by 5.21x (input)
// and 1.66x (output).
TEST(Lengths, BundledTableRatios) {
  auto means = [](std::span<const LengthPair> t) {
    double in = 0, out = 0;
    for (const auto& p : t) {
      in += p.input;
      out += p.output;
    }
    return std::pair{in / t.size(), out / t.size()};
  };
  const auto [si, so] = means(sharegpt_like_table());
  const auto [ai, ao] = means(azure_like_table());
  EXPECT_NEAR(ai / si, 5.21, 1e-9);
  EXPECT_NEAR(ao / so, 1.66, 1e-9);
}

TEST(Synthesize, IdsFollowArrivalOrder) {
  const auto w = synthesize(ArrivalProcess::poisson(5.0, 2),
                            LengthDistribution::fixed_lengths(10, 5), 50, 2);
  ASSERT_EQ(w.size(), 50u);
  for (std::size_t i = 0; i < w.size(); ++i) {
    EXPECT_EQ(w[i].id, i);
    if (i > 0) {
      EXPECT_LE(w[i - 1].arrival_ms, w[i].arrival_ms);
    }
  }
}

TEST(Trace, ParsesAndSorts) {
  std::istringstream in(
      R"({"arrival_ms":10.5,"input_tokens":7,"output_tokens":1})"
      "\n"
      R"({"arrival_ms":0,"input_tokens":128,"output_tokens":32})"
      "\n");
  const auto w = parse_trace(in);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0], (RequestSpec{1, 0.0, 128, 32}));
  EXPECT_EQ(w[1], (RequestSpec{0, 10.5, 7, 1}));
}

TEST(Trace, EmptyFile) {
  std::istringstream in("");
  EXPECT_TRUE(parse_trace(in).empty());
}

TEST(Trace, ZeroOutputRejected) {
  std::istringstream in(R"({"arrival_ms":0,"input_tokens":4,"output_tokens":0})");
  EXPECT_THROW(parse_trace(in), ValidationError);
}

TEST(Trace, MalformedLineNumber) {
  std::istringstream in(
      R"({"arrival_ms":0,"input_tokens":4,"output_tokens":2})"
      "\n\n"
      "{not json\n");
  try {
    parse_trace(in);
    FAIL() << "expected a parse error";
  } catch (const TraceParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Trace, MissingField) {
  std::istringstream in(R"({"arrival_ms":0,"input_tokens":4})");
  EXPECT_THROW(parse_trace(in), TraceParseError);
}

TEST(Trace, RoundTrip) {
  const auto w = synthesize(ArrivalProcess::poisson(3.0, 5),
                            LengthDistribution::empirical({azure_like_table().begin(),
                                                           azure_like_table().end()}),
                            40, 5);
  std::ostringstream out;
  write_trace(out, w);
  std::istringstream in(out.str());
  EXPECT_EQ(parse_trace(in), w);
}

}  // namespace
}  // namespace ttsim
