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

// Clock-stepped many-core engine: program loader, data loader, arbiter,
// reprogrammer, tracker and result analyzer around N cores.
//
// Per-rule timeline (one arbiter, one grant per cycle):
//
//   cycle t     arbiter grants idle core k the next unclaimed rule
//   cycle t+1   reprogrammer loads core k's PC with the rule's start word
//   cycle t+2   tracker releases core k; first instruction executes
//   ...         one instruction per cycle until EXIT or a fault
//
// A core that halts in cycle c is collected by the tracker in c, returns to
// idle (held in reset) and can be granted again in c. Results halting in the
// same cycle reach the analyzer in ascending core index. The first drop,
// store or error wins; every other in-flight core is force-reset.
//
// Within engine_tick the stages run in this order: release, reprogram,
// execute, collect/analyze, grant.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vebpf/assembler.hpp"
#include "vebpf/core.hpp"
#include "vebpf/pktio.hpp"
#include "vebpf/trace.hpp"
#include "vebpf/verdict.hpp"

namespace vebpf::manycore {

using isa::RuleMeta;

struct EngineConfig {
  std::size_t n_cores = 12;
  std::size_t prog_depth = 4096;
  /// Bytes; must be a multiple of 8. 136 holds the longest Ethernet + IPv4
  /// + TCP header (134 bytes).
  std::size_t data_depth = 136;
  std::uint64_t clock_hz = 100'000'000;
  std::uint64_t tick_budget = vcore::kDefaultTickBudget;
  std::uint64_t prog_word_cycles = 1;
  std::uint64_t data_word_cycles = 1;
};

/// Throws InvalidConfig if `cfg` cannot be instantiated.
void validate(const EngineConfig& cfg);

// ---------------------------------------------------------------------------
// arbiter

/// Round-robin grant: lowest idle index strictly after `last_grant`,
/// wrapping. Updates `last_grant` when a grant is made.
std::optional<std::size_t> arbiter_grant(const std::vector<bool>& idle, std::size_t& last_grant);

// ---------------------------------------------------------------------------
// analyzer

struct CoreResult {
  std::uint32_t rule_id;
  std::uint64_t r0;
  bool errored;
};

/// Result analyzer decision for one halted core.
///   errored       -> Error(rule)
///   r0 == 0       -> Drop(rule)
///   r0 == 1       -> Store(rule)
///   r0 == 2       -> nothing, unless every rule has been reprogrammed
///                    (rules_run == total_rules) and nothing is in flight,
///                    then DefaultPass
///   any other r0  -> Error(rule), with `unknown_encoding` set
std::optional<Verdict> analyze_result(const CoreResult& result, std::uint32_t rules_run, std::uint32_t total_rules,
                                      std::size_t in_flight, bool* unknown_encoding = nullptr);

// ---------------------------------------------------------------------------
// engine

enum class SlotPhase { Idle, Granted, Reprogrammed, Running };

struct CoreSlot {
  SlotPhase phase = SlotPhase::Idle;
  std::uint32_t rule = 0;
  std::uint64_t since = 0;  // cycle the current phase was entered
};

struct SchedulerState {
  std::vector<CoreSlot> slots;
  std::size_t last_grant = 0;
  /// Rules reprogrammed onto a core for the current packet.
  std::uint32_t next_rule_index = 0;
  std::uint32_t total_rules = 0;
  /// Per-rule dispatch marks for the current packet.
  std::vector<bool> claimed;

  std::size_t in_flight() const;
  std::vector<bool> idle_mask() const;
};

struct RuleTicks {
  std::uint32_t rule_id;
  std::size_t core;
  std::uint64_t ticks;
};

struct PacketResult {
  std::uint64_t pkt_id = 0;
  Verdict verdict;
  /// Rules that ran to halt (including the deciding one).
  std::uint32_t rules_executed = 0;
  std::uint32_t rules_dispatched = 0;
  std::uint32_t rules_cancelled = 0;
  /// Header-available through verdict-registered, both cycles inclusive.
  std::uint64_t latency_cycles = 0;
  std::uint64_t header_available_cycle = 0;
  std::uint64_t verdict_cycle = 0;
  std::uint64_t load_cycles = 0;
  std::vector<RuleTicks> per_rule_ticks;
};

struct EngineStats {
  std::uint64_t packets = 0;
  std::uint64_t unknown_r0 = 0;
  std::uint64_t forced_resets = 0;
};

class Engine {
 public:
  explicit Engine(EngineConfig cfg, const vcore::CallHandlerRegistry* handlers = nullptr);

  /// Broadcasts the image to every core's program memory over the shared
  /// program bus (prog_word_cycles per word, ACKs AND-reduced) and fills
  /// the rule metadata table. Returns cycles consumed.
  std::uint64_t upload_rules(const isa::ProgramImage& image);

  /// Pulses VeBPF_rst_new_rules: clears the rule table and lowers
  /// All_eBPF_rules_uploaded until the next upload. Throws EngineBusy while
  /// a packet is being processed.
  void reset_ruleset();

  /// Broadcasts a header to every core's data memory (data_word_cycles per
  /// 8-byte word), sets R1 = 0 and R2 = length, raises
  /// VeBPF_data_loading_done and starts a packet. Returns cycles consumed.
  std::uint64_t load_header(const pktio::HeaderSlice& slice, std::uint64_t pkt_id = 0,
                            std::optional<std::uint64_t> header_available_at = std::nullopt);

  /// Loads `rule_index` into idle core `core_id`, bypassing the arbiter.
  /// The PC changes immediately and the reprogramming occupies the cycle the
  /// next engine_tick() simulates; the core starts executing one tick later.
  /// Returns the cycles consumed.
  std::uint64_t reprogram_core(std::size_t core_id, std::uint32_t rule_index);

  /// Advances the global clock by one cycle.
  void engine_tick();

  /// load_header followed by engine_tick until a verdict registers.
  PacketResult process_packet(const pktio::HeaderSlice& slice, std::uint64_t pkt_id = 0,
                              std::optional<std::uint64_t> header_available_at = std::nullopt);

  /// Result of the packet whose verdict registered most recently, if it has
  /// not been taken yet.
  std::optional<PacketResult> take_result();

  /// Moves the clock forward to `cycle`, ticking if a packet is active.
  /// `cycle` must not be in the past.
  void advance_to(std::uint64_t cycle);

  std::uint64_t now() const { return now_; }
  bool packet_active() const { return active_.has_value(); }
  const EngineConfig& config() const { return cfg_; }
  const pktio::Flags& flags() const { return flags_; }
  const SchedulerState& scheduler() const { return sched_; }
  std::span<const RuleMeta> rules() const { return rules_; }
  const vcore::Core& core(std::size_t i) const { return cores_.at(i); }
  std::size_t core_count() const { return cores_.size(); }
  const EngineStats& stats() const { return stats_; }
  EventTrace& trace() { return trace_; }
  const EventTrace& trace() const { return trace_; }

 private:
  struct ActivePacket {
    PacketResult result;
    bool done = false;
  };

  void reprogram_slot(std::size_t core_id, std::uint32_t rule_index);
  void register_verdict(const Verdict& v);

  EngineConfig cfg_;
  std::vector<vcore::Core> cores_;
  std::vector<RuleMeta> rules_;
  SchedulerState sched_;
  pktio::Flags flags_;
  std::optional<ActivePacket> active_;
  std::optional<PacketResult> finished_;
  std::uint64_t header_len_ = 0;
  std::uint32_t next_unclaimed_ = 0;
  std::uint64_t now_ = 0;
  EngineStats stats_;
  EventTrace trace_;
};

}  // namespace vebpf::manycore
