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
#include <optional>
#include <string>
#include <string_view>

namespace vebpf {

/// Rule-author ABI: the value a rule leaves in R0 at exit. Faults are
/// reported through Error_out, never through R0.
enum class RuleResult : std::uint64_t {
  Drop = 0,
  Store = 1,
  DontCare = 2,
};

enum class VerdictKind { Drop, Store, Error, DefaultPass };

struct Verdict {
  VerdictKind kind = VerdictKind::DefaultPass;
  /// Rule whose result decided the verdict; empty for DefaultPass.
  std::optional<std::uint32_t> rule_id;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

std::string_view to_string(VerdictKind kind);
std::optional<VerdictKind> parse_verdict_kind(std::string_view text);

}  // namespace vebpf
