/*
 * Copyright 2026 The vebpf-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace vebpf {

using TraceValue = std::variant<std::int64_t, std::string>;

struct TraceEvent {
  std::uint64_t cycle;
  std::string module;
  std::string event;
  std::vector<std::pair<std::string, TraceValue>> payload;

  const TraceValue* find(std::string_view key) const {
    for (const auto& [k, v] : payload)
      if (k == key) return &v;
    return nullptr;
  }
  std::int64_t get_int(std::string_view key, std::int64_t fallback = -1) const {
    const TraceValue* v = find(key);
    return v && std::holds_alternative<std::int64_t>(*v) ? std::get<std::int64_t>(*v) : fallback;
  }
};

/// Append-only event log. Recording is off unless enabled, so callers
/// should test enabled() before building payloads on hot paths.
class EventTrace {
 public:
  void enable(bool on = true) { enabled_ = on; }
  bool enabled() const { return enabled_; }

  void add(std::uint64_t cycle, std::string module, std::string event,
           std::vector<std::pair<std::string, TraceValue>> payload = {}) {
    if (enabled_) events_.push_back({cycle, std::move(module), std::move(event), std::move(payload)});
  }

  const std::vector<TraceEvent>& events() const { return events_; }
  void clear() { events_.clear(); }

  /// One JSON object per line: {"cycle":..,"module":..,"event":..,<payload>}.
  void write_jsonl(std::ostream& out) const;
  std::string to_jsonl() const;

 private:
  bool enabled_ = false;
  std::vector<TraceEvent> events_;
};

}  // namespace vebpf
