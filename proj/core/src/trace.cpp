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

#include "vebpf/trace.hpp"

#include <json.hpp>
#include <sstream>

namespace vebpf {

void EventTrace::write_jsonl(std::ostream& out) const {
  for (const auto& e : events_) {
    nlohmann::ordered_json j;
    j["cycle"] = e.cycle;
    j["module"] = e.module;
    j["event"] = e.event;
    for (const auto& [key, value] : e.payload) {
      std::visit([&, &k = key](const auto& v) { j[k] = v; }, value);
    }
    out << j.dump() << '\n';
  }
}

std::string EventTrace::to_jsonl() const {
  std::ostringstream s;
  write_jsonl(s);
  return s.str();
}

}  // namespace vebpf
