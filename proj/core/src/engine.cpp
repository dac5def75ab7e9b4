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

#include "vebpf/engine.hpp"

#include <string>

#include "vebpf/error.hpp"

namespace vebpf::manycore {

namespace {

std::int64_t i64(std::uint64_t v) { return static_cast<std::int64_t>(v); }

}  // namespace

void validate(const EngineConfig& cfg) {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (cfg.n_cores == 0) bad("n_cores must be at least 1");
  if (cfg.prog_depth == 0) bad("prog_depth must be at least 1");
  if (cfg.data_depth == 0 || cfg.data_depth % 8 != 0) bad("data_depth must be a positive multiple of 8");
  if (cfg.data_depth > vcore::kStackBase) bad("data_depth overlaps the stack window");
  if (cfg.clock_hz == 0) bad("clock_hz must be nonzero");
  if (cfg.tick_budget == 0) bad("tick_budget must be nonzero");
  if (cfg.prog_word_cycles == 0 || cfg.data_word_cycles == 0) bad("bus word cycles must be nonzero");
}

std::optional<std::size_t> arbiter_grant(const std::vector<bool>& idle, std::size_t& last_grant) {
  const std::size_t n = idle.size();
  for (std::size_t step = 1; step <= n; ++step) {
    const std::size_t i = (last_grant + step) % n;
    if (idle[i]) {
      last_grant = i;
      return i;
    }
  }
  return std::nullopt;
}

std::optional<Verdict> analyze_result(const CoreResult& result, std::uint32_t rules_run, std::uint32_t total_rules,
                                      std::size_t in_flight, bool* unknown_encoding) {
  if (unknown_encoding) *unknown_encoding = false;
  if (result.errored) return Verdict{VerdictKind::Error, result.rule_id};
  switch (result.r0) {
    case static_cast<std::uint64_t>(RuleResult::Drop): return Verdict{VerdictKind::Drop, result.rule_id};
    case static_cast<std::uint64_t>(RuleResult::Store): return Verdict{VerdictKind::Store, result.rule_id};
    case static_cast<std::uint64_t>(RuleResult::DontCare):
      if (rules_run == total_rules && in_flight == 0) return Verdict{VerdictKind::DefaultPass, std::nullopt};
      return std::nullopt;
    default:
      if (unknown_encoding) *unknown_encoding = true;
      return Verdict{VerdictKind::Error, result.rule_id};
  }
}

std::size_t SchedulerState::in_flight() const {
  std::size_t n = 0;
  for (const auto& s : slots) n += s.phase != SlotPhase::Idle;
  return n;
}

std::vector<bool> SchedulerState::idle_mask() const {
  std::vector<bool> mask(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) mask[i] = slots[i].phase == SlotPhase::Idle;
  return mask;
}

Engine::Engine(EngineConfig cfg, const vcore::CallHandlerRegistry* handlers) : cfg_(cfg) {
  validate(cfg_);
  const vcore::CoreConfig core_cfg{cfg_.prog_depth, cfg_.data_depth, cfg_.tick_budget};
  cores_.reserve(cfg_.n_cores);
  for (std::size_t i = 0; i < cfg_.n_cores; ++i) cores_.emplace_back(core_cfg, handlers);
  sched_.slots.resize(cfg_.n_cores);
  sched_.last_grant = cfg_.n_cores - 1;
}

std::uint64_t Engine::upload_rules(const isa::ProgramImage& image) {
  if (active_) throw Error(ErrorCode::EngineBusy, "cannot upload rules while a packet is in flight");
  if (image.words.size() > cfg_.prog_depth) {
    throw Error(ErrorCode::ImageTooLarge, "image of " + std::to_string(image.words.size()) +
                                              " words exceeds program depth " + std::to_string(cfg_.prog_depth));
  }
  isa::validate_layout(image);
  for (auto& c : cores_) {
    c.assert_reset();
    for (std::size_t w = 0; w < image.words.size(); ++w) c.write_prog_word(w, image.words[w]);
  }
  const std::uint64_t cycles = image.words.size() * cfg_.prog_word_cycles;
  now_ += cycles;
  rules_ = image.rules;
  sched_.total_rules = static_cast<std::uint32_t>(rules_.size());
  flags_.all_rules_uploaded = true;
  flags_.rst_new_rules = false;
  if (trace_.enabled()) {
    trace_.add(now_ == 0 ? 0 : now_ - 1, "program_loader", "all_rules_uploaded",
               {{"words", i64(image.words.size())}, {"rules", i64(rules_.size())}});
  }
  return cycles;
}

void Engine::reset_ruleset() {
  if (active_) throw Error(ErrorCode::EngineBusy, "cannot reset the ruleset while a packet is in flight");
  rules_.clear();
  sched_.total_rules = 0;
  flags_.all_rules_uploaded = false;
  flags_.rst_new_rules = false;
  trace_.add(now_, "program_loader", "rst_new_rules");
}

std::uint64_t Engine::load_header(const pktio::HeaderSlice& slice, std::uint64_t pkt_id,
                                  std::optional<std::uint64_t> header_available_at) {
  if (active_) throw Error(ErrorCode::EngineBusy, "a packet is already being processed");
  if (!flags_.all_rules_uploaded) throw Error(ErrorCode::RulesNotUploaded, "no ruleset has been uploaded");
  if (slice.length() > cfg_.data_depth) {
    throw Error(ErrorCode::HeaderTooLong, "header of " + std::to_string(slice.length()) +
                                              " bytes exceeds data depth " + std::to_string(cfg_.data_depth));
  }
  const std::uint64_t available = header_available_at.value_or(now_);
  if (available > now_) advance_to(available);

  flags_.rxpkthdr_available = true;
  flags_.result_registered = false;
  flags_.load_next_rxpkthdr = false;
  flags_.data_loading_done = false;
  if (trace_.enabled()) {
    trace_.add(available, "slicer", "rxpkthdr_available", {{"pkt", i64(pkt_id)}, {"len", i64(slice.length())}});
  }

  const std::size_t words = (slice.length() + 7) / 8;
  for (std::size_t w = 0; w < words; ++w) {
    std::uint64_t word = 0;
    for (std::size_t b = 0; b < 8 && w * 8 + b < slice.length(); ++b) {
      word |= static_cast<std::uint64_t>(slice.bytes[w * 8 + b]) << (8 * b);
    }
    for (auto& c : cores_) c.write_data_word(w * 8, word, 8);
    if (trace_.enabled()) {
      trace_.add(now_ + w * cfg_.data_word_cycles, "data_loader", "load_word", {{"addr", i64(w * 8)}});
    }
  }
  for (auto& c : cores_) {
    c.set_input_register(1, 0);
    c.set_input_register(2, slice.length());
  }
  const std::uint64_t cycles = words * cfg_.data_word_cycles;
  now_ += cycles;
  header_len_ = slice.length();
  flags_.data_loading_done = true;
  flags_.rxpkthdr_available = false;
  if (trace_.enabled()) trace_.add(cycles == 0 ? now_ : now_ - 1, "data_loader", "data_loading_done", {{"pkt", i64(pkt_id)}});

  sched_.next_rule_index = 0;
  sched_.total_rules = static_cast<std::uint32_t>(rules_.size());
  sched_.claimed.assign(rules_.size(), false);
  sched_.last_grant = cfg_.n_cores - 1;
  next_unclaimed_ = 0;

  ActivePacket pkt;
  pkt.result.pkt_id = pkt_id;
  pkt.result.header_available_cycle = available;
  pkt.result.load_cycles = cycles;
  active_ = std::move(pkt);
  finished_.reset();
  return cycles;
}

void Engine::reprogram_slot(std::size_t core_id, std::uint32_t rule_index) {
  vcore::Core& c = cores_[core_id];
  c.assert_reset();
  c.set_input_register(1, 0);
  c.set_input_register(2, header_len_);
  for (unsigned r = 3; r <= 5; ++r) c.set_input_register(r, 0);
  c.reset(rules_[rule_index].start_word);
  ++sched_.next_rule_index;
  CoreSlot& slot = sched_.slots[core_id];
  slot.phase = SlotPhase::Reprogrammed;
  slot.rule = rule_index;
  slot.since = now_;
  if (trace_.enabled()) {
    trace_.add(now_, "reprogrammer", "reprogram",
               {{"core", i64(core_id)}, {"rule", rule_index}, {"pc", i64(rules_[rule_index].start_word)}});
  }
}

std::uint64_t Engine::reprogram_core(std::size_t core_id, std::uint32_t rule_index) {
  if (!active_) throw Error(ErrorCode::NoActivePacket, "reprogramming needs a loaded packet header");
  if (core_id >= cores_.size()) throw Error(ErrorCode::CoreBusy, "no core " + std::to_string(core_id));
  if (sched_.slots[core_id].phase != SlotPhase::Idle) {
    throw Error(ErrorCode::CoreBusy, "core " + std::to_string(core_id) + " is not idle");
  }
  if (rule_index >= rules_.size() || sched_.claimed[rule_index]) {
    throw Error(ErrorCode::RuleIndexOutOfRange,
                "rule " + std::to_string(rule_index) + " does not exist or was already dispatched");
  }
  sched_.claimed[rule_index] = true;
  reprogram_slot(core_id, rule_index);
  return vcore::kResetCycles;
}

void Engine::register_verdict(const Verdict& v) {
  PacketResult& r = active_->result;
  for (std::size_t i = 0; i < sched_.slots.size(); ++i) {
    CoreSlot& slot = sched_.slots[i];
    if (slot.phase == SlotPhase::Idle) continue;
    cores_[i].assert_reset();
    ++r.rules_cancelled;
    ++stats_.forced_resets;
    if (trace_.enabled()) trace_.add(now_, "tracker", "force_reset", {{"core", i64(i)}, {"rule", slot.rule}});
    slot.phase = SlotPhase::Idle;
  }
  r.verdict = v;
  r.verdict_cycle = now_;
  r.latency_cycles = now_ - r.header_available_cycle + 1;
  r.rules_dispatched = sched_.next_rule_index;
  flags_.result_registered = true;
  flags_.load_next_rxpkthdr = true;
  flags_.data_loading_done = false;
  if (trace_.enabled()) {
    std::vector<std::pair<std::string, TraceValue>> payload{{"pkt", i64(r.pkt_id)},
                                                            {"verdict", std::string(to_string(v.kind))}};
    if (v.rule_id) payload.emplace_back("rule", *v.rule_id);
    trace_.add(now_, "analyzer", "result_registered", std::move(payload));
  }
  ++stats_.packets;
  finished_ = std::move(r);
  active_.reset();
}

void Engine::engine_tick() {
  if (!active_) {
    ++now_;
    return;
  }
  const std::uint64_t c = now_;
  auto& slots = sched_.slots;

  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].phase == SlotPhase::Reprogrammed && slots[i].since < c) {
      cores_[i].release();
      slots[i].phase = SlotPhase::Running;
      slots[i].since = c;
      if (trace_.enabled()) trace_.add(c, "tracker", "running", {{"core", i64(i)}, {"rule", slots[i].rule}});
    }
  }
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].phase == SlotPhase::Granted && slots[i].since < c) reprogram_slot(i, slots[i].rule);
  }
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].phase == SlotPhase::Running) cores_[i].step();
  }

  std::optional<Verdict> verdict;
  PacketResult& r = active_->result;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].phase != SlotPhase::Running) continue;
    vcore::Core& core = cores_[i];
    if (core.status() == vcore::CoreStatus::Running) continue;
    const CoreResult result{slots[i].rule, core.r0(), core.errored()};
    r.per_rule_ticks.push_back({slots[i].rule, i, core.ticks()});
    ++r.rules_executed;
    if (trace_.enabled()) {
      std::vector<std::pair<std::string, TraceValue>> payload{
          {"core", i64(i)}, {"rule", slots[i].rule}, {"r0", i64(core.r0())}, {"ticks", i64(core.ticks())}};
      if (core.error()) payload.emplace_back("error", std::string(vcore::to_string(*core.error())));
      trace_.add(c, "tracker", core.errored() ? "error" : "halt", std::move(payload));
    }
    core.assert_reset();
    slots[i].phase = SlotPhase::Idle;
    if (verdict) continue;
    bool unknown = false;
    verdict = analyze_result(result, sched_.next_rule_index, sched_.total_rules, sched_.in_flight(), &unknown);
    if (unknown) ++stats_.unknown_r0;
  }
  if (!verdict && sched_.total_rules == 0) verdict = Verdict{VerdictKind::DefaultPass, std::nullopt};

  if (verdict) {
    register_verdict(*verdict);
  } else {
    while (next_unclaimed_ < sched_.total_rules && sched_.claimed[next_unclaimed_]) ++next_unclaimed_;
    if (next_unclaimed_ < sched_.total_rules) {
      if (auto g = arbiter_grant(sched_.idle_mask(), sched_.last_grant)) {
        CoreSlot& slot = slots[*g];
        slot.phase = SlotPhase::Granted;
        slot.rule = next_unclaimed_;
        slot.since = c;
        sched_.claimed[next_unclaimed_] = true;
        if (trace_.enabled()) trace_.add(c, "arbiter", "grant", {{"core", i64(*g)}, {"rule", slot.rule}});
      }
    }
  }
  ++now_;
}

PacketResult Engine::process_packet(const pktio::HeaderSlice& slice, std::uint64_t pkt_id,
                                    std::optional<std::uint64_t> header_available_at) {
  load_header(slice, pkt_id, header_available_at);
  while (active_) engine_tick();
  return *take_result();
}

std::optional<PacketResult> Engine::take_result() {
  std::optional<PacketResult> out;
  out.swap(finished_);
  return out;
}

void Engine::advance_to(std::uint64_t cycle) {
  if (cycle < now_) {
    throw Error(ErrorCode::InvalidConfig,
                "cannot move the clock back from " + std::to_string(now_) + " to " + std::to_string(cycle));
  }
  while (active_ && now_ < cycle) engine_tick();
  if (now_ < cycle) now_ = cycle;
}

}  // namespace vebpf::manycore
