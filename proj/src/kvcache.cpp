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

#include "ttsim/kvcache.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

#include "ttsim/errors.hpp"

namespace ttsim {

void KvConfig::validate() const {
  if (page_size < 1) throw ConfigError("kv.page_size must be >= 1");
  if (total_pages < 1) throw ConfigError("kv.total_pages must be >= 1");
}

std::int64_t pages_for(std::int64_t tokens, std::int64_t page_size) {
  return (tokens + page_size - 1) / page_size;
}

std::int64_t pages_needed(std::int64_t current_tokens, std::int64_t new_tokens,
                          std::int64_t page_size) {
  return pages_for(current_tokens + new_tokens, page_size) - pages_for(current_tokens, page_size);
}

KvCache::KvCache(KvConfig config) : config_(config), free_pages_(config.total_pages) {
  config_.validate();
}

AllocResult KvCache::allocate(RequestId id, std::int64_t new_tokens) {
  if (new_tokens < 0) throw std::logic_error("negative KV allocation");
  auto it = entries_.find(id);
  const std::int64_t current = it == entries_.end() ? 0 : it->second.tokens;
  const std::int64_t need = pages_needed(current, new_tokens, config_.page_size);
  if (need > free_pages_) return AllocResult::kInsufficient;
  Entry& e = it == entries_.end() ? entries_[id] : it->second;
  e.tokens += new_tokens;
  e.pages += need;
  free_pages_ -= need;
  return AllocResult::kOk;
}

std::int64_t KvCache::release(RequestId id) {
  auto it = entries_.find(id);
  if (it == entries_.end()) {
    throw std::logic_error("KV release of request " + std::to_string(id) +
                           " which holds no pages");
  }
  const std::int64_t freed = it->second.pages;
  free_pages_ += freed;
  entries_.erase(it);
  return freed;
}

double KvCache::idle_rate() const {
  return static_cast<double>(free_pages_) / static_cast<double>(config_.total_pages);
}

std::int64_t KvCache::tokens_of(RequestId id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? 0 : it->second.tokens;
}

std::int64_t KvCache::pages_of(RequestId id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? 0 : it->second.pages;
}

std::int64_t KvCache::allocated_pages() const {
  return std::accumulate(entries_.begin(), entries_.end(), std::int64_t{0},
                         [](std::int64_t acc, const auto& kv) { return acc + kv.second.pages; });
}

bool KvCache::consistent() const {
  if (free_pages_ < 0 || free_pages_ + allocated_pages() != config_.total_pages) return false;
  for (const auto& [id, e] : entries_) {
    if (e.pages != pages_for(e.tokens, config_.page_size)) return false;
  }
  return true;
}

std::optional<RequestId> select_preemption_victim(std::span<const VictimCandidate> active) {
  if (active.empty()) return std::nullopt;
  const VictimCandidate* best = &active.front();
  for (const VictimCandidate& c : active) {
    if (c.arrival_ms > best->arrival_ms || (c.arrival_ms == best->arrival_ms && c.id > best->id)) {
      best = &c;
    }
  }
  return best->id;
}

}  // namespace ttsim
