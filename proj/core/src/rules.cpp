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

#include "vebpf/rules.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <sstream>

#include "vebpf/error.hpp"

namespace vebpf::rules {

namespace {

FirewallRuleSpec src_rule(std::uint32_t addr, std::uint8_t len) {
  std::string name = "block_src_" + format_ipv4(addr);
  std::replace(name.begin(), name.end(), '.', '_');
  if (len != 32) name += "_" + std::to_string(len);
  return {BlockSrcIp{{addr, len}}, name, 1};
}

FirewallRuleSpec port_rule(std::uint16_t port, int type) {
  return {BlockUdpDstPort{port}, "block_udp_dport_" + std::to_string(port), type};
}

const std::vector<FirewallRuleSpec>& table() {
  static const std::vector<FirewallRuleSpec> t = [] {
    std::vector<FirewallRuleSpec> v;
    v.push_back(src_rule(0xffffffffu, 32));
    v.push_back(src_rule(0x7f000000u, 8));
    v.push_back(src_rule(0xf0000000u, 4));
    v.push_back(src_rule(0x00000000u, 8));
    for (std::uint16_t p : {111, 2000, 37, 135, 137, 138, 161, 162, 514}) v.push_back(port_rule(p, 2));
    for (std::uint16_t p : {69, 2049, 389, 4045}) v.push_back(port_rule(p, 3));
    return v;
  }();
  return t;
}

}  // namespace

std::span<const FirewallRuleSpec> firewall_table() { return table(); }

std::vector<FirewallRuleSpec> rule_specs(std::span<const int> types) {
  std::array<bool, 4> wanted{};
  for (int t : types) {
    if (t == 4) {
      wanted[1] = wanted[2] = wanted[3] = true;
    } else if (t >= 1 && t <= 3) {
      wanted[static_cast<std::size_t>(t)] = true;
    } else {
      throw Error(ErrorCode::InvalidConfig, "rule type must be 1-4, got " + std::to_string(t));
    }
  }
  std::vector<FirewallRuleSpec> out;
  for (const auto& r : table()) {
    if (wanted[static_cast<std::size_t>(r.type)]) out.push_back(r);
  }
  return out;
}

std::vector<int> parse_rule_types(std::string_view text) {
  std::vector<int> types;
  while (!text.empty()) {
    std::size_t comma = text.find(',');
    std::string_view item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    if (item.starts_with("type")) item.remove_prefix(4);
    int t = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), t);
    if (ec != std::errc() || ptr != item.data() + item.size() || t < 1 || t > 4) {
      throw Error(ErrorCode::InvalidConfig, "bad rule type '" + std::string(item) + "'");
    }
    types.push_back(t);
  }
  if (types.empty()) throw Error(ErrorCode::InvalidConfig, "empty rule type list");
  return types;
}

std::uint32_t parse_ipv4(std::string_view text) {
  std::uint32_t ip = 0;
  for (int octet = 0; octet < 4; ++octet) {
    unsigned v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || v > 255 || ptr == text.data()) {
      throw Error(ErrorCode::InvalidConfig, "bad IPv4 address");
    }
    ip = ip << 8 | v;
    text.remove_prefix(static_cast<std::size_t>(ptr - text.data()));
    if (octet < 3) {
      if (text.empty() || text[0] != '.') throw Error(ErrorCode::InvalidConfig, "bad IPv4 address");
      text.remove_prefix(1);
    }
  }
  if (!text.empty()) throw Error(ErrorCode::InvalidConfig, "bad IPv4 address");
  return ip;
}

std::string format_ipv4(std::uint32_t ip) {
  return std::to_string(ip >> 24) + "." + std::to_string((ip >> 16) & 0xff) + "." +
         std::to_string((ip >> 8) & 0xff) + "." + std::to_string(ip & 0xff);
}

std::string rule_assembly(const FirewallRuleSpec& spec) {
  const std::string out = spec.name + "_out";
  std::ostringstream s;
  s << ".rule " << spec.name << "\n";
  s << "    mov r0, 2\n";
  s << "    jlt r2, 34, " << out << "\n";
  s << "    ldxh r3, [r1+12]\n";
  s << "    jne r3, 8, " << out << "          ; ethertype 0x0800 read little-endian\n";
  if (const auto* ip = std::get_if<BlockSrcIp>(&spec.kind)) {
    const Ipv4Prefix& p = ip->prefix;
    s << "    ldxw r3, [r1+26]                  ; source address\n";
    s << "    be32 r3\n";
    if (p.length >= 32) {
      s << "    jne32 r3, " << static_cast<std::int32_t>(p.addr) << ", " << out << "\n";
    } else if (p.length > 0) {
      s << "    rsh r3, " << (32 - p.length) << "\n";
      s << "    jne r3, " << (p.addr >> (32 - p.length)) << ", " << out << "\n";
    }
  } else {
    const auto port = std::get<BlockUdpDstPort>(spec.kind).port;
    s << "    ldxb r3, [r1+23]\n";
    s << "    jne r3, 17, " << out << "                 ; UDP only\n";
    s << "    ldxb r4, [r1+14]\n";
    s << "    and r4, 15\n";
    s << "    lsh r4, 2                         ; IPv4 header bytes\n";
    s << "    mov r5, r4\n";
    s << "    add r5, 18                        ; end of the destination port\n";
    s << "    jgt r5, r2, " << out << "\n";
    s << "    add r4, r1\n";
    s << "    ldxh r3, [r4+16]\n";
    s << "    be16 r3\n";
    s << "    jne r3, " << port << ", " << out << "\n";
  }
  s << "    mov r0, 0\n";
  s << out << ":\n";
  s << "    exit\n";
  return s.str();
}

std::string ruleset_assembly(std::span<const int> types) {
  std::string text;
  for (const auto& spec : rule_specs(types)) {
    if (!text.empty()) text += "\n";
    text += rule_assembly(spec);
  }
  return text;
}

isa::ProgramImage build_ruleset(std::span<const int> types) { return isa::assemble(ruleset_assembly(types)); }

BaselineResult baseline_run(const isa::ProgramImage& rules, const pktio::HeaderSlice& slice,
                            const BaselineConfig& cfg, const vcore::CoreConfig& core_cfg,
                            const vcore::CallHandlerRegistry* handlers) {
  if (rules.words.size() > core_cfg.prog_depth) {
    throw Error(ErrorCode::ImageTooLarge, "ruleset does not fit the baseline program memory");
  }
  if (slice.length() > core_cfg.data_depth) {
    throw Error(ErrorCode::HeaderTooLong, "header does not fit the baseline data memory");
  }
  vcore::Core core(core_cfg, handlers);
  for (std::size_t i = 0; i < rules.words.size(); ++i) core.write_prog_word(i, rules.words[i]);
  for (std::size_t i = 0; i < slice.length(); ++i) core.write_data_word(i, slice.bytes[i], 1);

  BaselineResult result;
  std::uint64_t cost = 0;
  for (std::uint32_t id = 0; id < rules.rules.size(); ++id) {
    core.assert_reset();
    core.reset(rules.rules[id].start_word);
    core.set_input_register(1, 0);
    core.set_input_register(2, slice.length());
    for (unsigned r = 3; r <= 5; ++r) core.set_input_register(r, 0);
    core.release();
    const vcore::CoreStatus status = core.run_until_halt(core_cfg.tick_budget);
    cost += core.ticks();
    result.instructions += core.retired();
    ++result.rules_run;
    if (status == vcore::CoreStatus::Errored) {
      result.verdict = {VerdictKind::Error, id};
      break;
    }
    const std::uint64_t r0 = core.r0();
    if (r0 == static_cast<std::uint64_t>(RuleResult::Drop)) {
      result.verdict = {VerdictKind::Drop, id};
      break;
    }
    if (r0 == static_cast<std::uint64_t>(RuleResult::Store)) {
      result.verdict = {VerdictKind::Store, id};
      break;
    }
    if (r0 != static_cast<std::uint64_t>(RuleResult::DontCare)) {
      result.verdict = {VerdictKind::Error, id};
      break;
    }
  }
  result.ticks = cfg.per_packet_overhead + cfg.cost_factor * cost;
  return result;
}

}  // namespace vebpf::rules
