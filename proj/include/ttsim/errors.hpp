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

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ttsim {

/// Invalid or inconsistent configuration (bad ranges, unknown keys, bad rates).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A trace line that could not be parsed. Line numbers are 1-based.
class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input that violates a domain invariant (e.g. zero-length output).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A request that can never fit in the KV cache, even with the cache to itself.
class UnschedulableError : public std::runtime_error {
 public:
  UnschedulableError(std::uint32_t request_id, const std::string& what)
      : std::runtime_error(what), request_id_(request_id) {}

  std::uint32_t request_id() const noexcept { return request_id_; }

 private:
  std::uint32_t request_id_;
};

}  // namespace ttsim
