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

#include "vebpf/verdict.hpp"

namespace vebpf {

std::string_view to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::Drop: return "drop";
    case VerdictKind::Store: return "store";
    case VerdictKind::Error: return "error";
    case VerdictKind::DefaultPass: return "default_pass";
  }
  return "?";
}

std::optional<VerdictKind> parse_verdict_kind(std::string_view text) {
  for (auto k : {VerdictKind::Drop, VerdictKind::Store, VerdictKind::Error, VerdictKind::DefaultPass}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

}  // namespace vebpf
