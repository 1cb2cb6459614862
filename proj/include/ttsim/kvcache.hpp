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
#include <map>
#include <optional>
#include <span>

#include "ttsim/workload.hpp"

namespace ttsim {

struct KvConfig {
  std::int64_t page_size = 16;
  std::int64_t total_pages = 4096;

  void validate() const;
  std::int64_t capacity_tokens() const { return page_size * total_pages; }
};

/// Pages a request must add to grow from `current_tokens` to
/// `current_tokens + new_tokens` stored tokens.
std::int64_t pages_needed(std::int64_t current_tokens, std::int64_t new_tokens,
                          std::int64_t page_size);

/// Pages required to hold `tokens` stored tokens.
std::int64_t pages_for(std::int64_t tokens, std::int64_t page_size);

enum class AllocResult { kOk, kInsufficient };

// Paged KV cache with a single page table shared by every pipeline stage.
// Allocation is all-or-nothing: a failed allocate() leaves the state untouched.
class KvCache {
 public:
  explicit KvCache(KvConfig config);

  AllocResult allocate(RequestId id, std::int64_t new_tokens);

  // Frees every page held by `id`. Throws std::logic_error for an id that
  // holds no allocation.
  std::int64_t release(RequestId id);

  // Fraction of pages currently free, in [0, 1].
  double idle_rate() const;

  bool holds(RequestId id) const { return entries_.contains(id); }
  std::int64_t tokens_of(RequestId id) const;
  std::int64_t pages_of(RequestId id) const;

  std::int64_t free_pages() const { return free_pages_; }
  std::int64_t allocated_pages() const;
  std::int64_t total_pages() const { return config_.total_pages; }
  std::int64_t page_size() const { return config_.page_size; }
  const KvConfig& config() const { return config_; }

  // free + allocated == total, and every entry's pages match its tokens.
  bool consistent() const;

 private:
  struct Entry {
    std::int64_t tokens = 0;
    std::int64_t pages = 0;
  };

  KvConfig config_;
  std::int64_t free_pages_;
  std::map<RequestId, Entry> entries_;
};

struct VictimCandidate {
  RequestId id = 0;
  double arrival_ms = 0.0;
};

/// Latest-arrived candidate (ties broken toward the larger id), or none.
std::optional<RequestId> select_preemption_victim(std::span<const VictimCandidate> active);

}  // namespace ttsim
