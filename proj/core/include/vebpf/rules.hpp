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

// Firewall ruleset generator and the sequential baseline processor model.
//
// Rule ABI (what every generated rule assumes):
//   R1 = byte address of the header in data memory (0)
//   R2 = header length in bytes
//   R0 at exit: 0 = drop, 1 = store, 2 = don't care
//
// Rule types:
//   1  illegal/spoofed source IPv4: 255.255.255.255/32, 127.0.0.0/8,
//      240.0.0.0/4, 0.0.0.0/8
//   2  network-service UDP destination ports: 111 2000 37 135 137 138 161
//      162 514
//   3  file-system UDP destination ports: 69 2049 389 4045
//   4  all of the above (17 rules)
//
// Each blocked value is its own rule. Every rule returns don't-care for
// non-IPv4 frames and for headers too short to contain the field.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vebpf/assembler.hpp"
#include "vebpf/core.hpp"
#include "vebpf/pktio.hpp"
#include "vebpf/verdict.hpp"

namespace vebpf::rules {

struct Ipv4Prefix {
  std::uint32_t addr;  // host order
  std::uint8_t length;

  bool contains(std::uint32_t ip) const {
    if (length == 0) return true;
    const std::uint32_t mask = length >= 32 ? 0xffffffffu : ~(0xffffffffu >> length);
    return (ip & mask) == (addr & mask);
  }
};

struct BlockSrcIp {
  Ipv4Prefix prefix;
};
struct BlockUdpDstPort {
  std::uint16_t port;
};

struct FirewallRuleSpec {
  std::variant<BlockSrcIp, BlockUdpDstPort> kind;
  std::string name;
  int type;  // 1, 2 or 3
};

/// The 17 blocked values, type 1 first, in table order.
std::span<const FirewallRuleSpec> firewall_table();

/// Specs for a set of types; 4 expands to {1, 2, 3}. Order follows the
/// table, duplicates removed.
std::vector<FirewallRuleSpec> rule_specs(std::span<const int> types);

/// Parses "4", "1,3", "type2", "type1,type3". Throws InvalidConfig.
std::vector<int> parse_rule_types(std::string_view text);

std::string rule_assembly(const FirewallRuleSpec& spec);
std::string ruleset_assembly(std::span<const int> types);
isa::ProgramImage build_ruleset(std::span<const int> types);

/// Dotted-quad parser; throws InvalidConfig.
std::uint32_t parse_ipv4(std::string_view text);
std::string format_ipv4(std::uint32_t ip);

// ---------------------------------------------------------------------------
// sequential baseline

/// Stand-in for a general-purpose soft processor running the same rules one
/// after another. The defaults are placeholders, not measured values.
struct BaselineConfig {
  std::uint64_t cost_factor = 4;
  std::uint64_t per_packet_overhead = 200;
};

struct BaselineResult {
  Verdict verdict;
  std::uint64_t ticks = 0;
  std::uint64_t instructions = 0;
  std::uint32_t rules_run = 0;
};

/// Runs rules in index order on one core with early exit on the first
/// drop/store/error. ticks = per_packet_overhead + cost_factor * retired
/// instructions (CALL extra ticks included in the retired cost).
BaselineResult baseline_run(const isa::ProgramImage& rules, const pktio::HeaderSlice& slice,
                            const BaselineConfig& cfg, const vcore::CoreConfig& core_cfg = {},
                            const vcore::CallHandlerRegistry* handlers = nullptr);

}  // namespace vebpf::rules
