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

// One processing element: a Harvard-architecture eBPF interpreter with
// externally settable PC, Halt/Error/Ticks outputs and a call-handler port.
//
// Address map seen by LDX/ST/STX:
//   [0, data_depth)                      data memory (packet header)
//   [kStackBase, kStackBase + 512)       stack; R10 == kStackBase + 512
// Anything else faults with OutOfBoundsLoad / OutOfBoundsStore.
//
// Cost model: one tick per retired instruction; CALL adds the handler's
// declared extra ticks. A faulting instruction is not retired.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "vebpf/isa.hpp"

namespace vebpf::vcore {

inline constexpr std::size_t kStackSize = 512;
inline constexpr std::uint64_t kStackBase = 0x10000000;
inline constexpr std::uint64_t kStackTop = kStackBase + kStackSize;
inline constexpr std::uint64_t kDefaultTickBudget = 4096;
/// Simulated cycles taken by reset(core, pc).
inline constexpr std::uint64_t kResetCycles = 1;

enum class CoreError {
  OutOfBoundsLoad,
  OutOfBoundsStore,
  PcOutOfRange,
  UnknownOpcode,
  UnknownHelper,
  TickBudgetExceeded,
};
std::string_view to_string(CoreError e);

enum class CoreStatus { Running, Halted, Errored };

struct HelperResult {
  std::uint64_t r0;
  std::uint64_t extra_ticks;
};
using HelperFn = std::function<HelperResult(std::span<const std::uint64_t, 5> args)>;

/// Custom call handler table. Unregistered ids fault with UnknownHelper.
class CallHandlerRegistry {
 public:
  void add(std::int32_t id, HelperFn fn) { handlers_[id] = std::move(fn); }
  const HelperFn* find(std::int32_t id) const {
    auto it = handlers_.find(id);
    return it == handlers_.end() ? nullptr : &it->second;
  }

 private:
  std::map<std::int32_t, HelperFn> handlers_;
};

struct CoreConfig {
  std::size_t prog_depth = 4096;  // 64-bit words
  std::size_t data_depth = 136;   // bytes
  std::uint64_t tick_budget = kDefaultTickBudget;
};

class Core {
 public:
  explicit Core(CoreConfig cfg = {}, const CallHandlerRegistry* handlers = nullptr);

  // reset_in / control port

  /// Drives reset_in HIGH. Any running program is abandoned.
  void assert_reset();
  /// Loads the external instruction pointer while in reset. R1-R5 survive;
  /// R0 and R6-R9 are cleared; ticks, Halt_out and Error_out are cleared.
  /// Returns the cycles consumed (always kResetCycles).
  std::uint64_t reset(std::size_t start_pc);
  /// Drives reset_in LOW; the next step() executes prog_mem[pc]. Idempotent.
  void release();

  // execution

  CoreStatus step();
  CoreStatus run_until_halt(std::uint64_t tick_budget);
  CoreStatus run_until_halt() { return run_until_halt(cfg_.tick_budget); }

  // shared-bus ports; legal only while in reset, acknowledged same cycle

  void write_data_word(std::size_t byte_addr, std::uint64_t word, unsigned width);
  void write_prog_word(std::size_t word_index, std::uint64_t word);

  void set_input_register(unsigned index, std::uint64_t value);

  // outputs

  bool in_reset() const { return in_reset_; }
  bool halted() const { return halted_; }
  bool errored() const { return error_.has_value(); }
  std::optional<CoreError> error() const { return error_; }
  std::uint64_t ticks() const { return ticks_; }
  std::uint64_t retired() const { return retired_; }
  std::size_t pc() const { return pc_; }
  std::uint64_t r0() const { return regs_[0]; }
  const std::array<std::uint64_t, isa::kRegisterCount>& regs() const { return regs_; }
  CoreStatus status() const;

  std::span<const std::uint8_t> data_mem() const { return data_; }
  std::span<const std::uint64_t> prog_mem() const { return prog_; }
  std::span<const std::uint8_t> stack_mem() const { return stack_; }
  const CoreConfig& config() const { return cfg_; }
  void set_tick_budget(std::uint64_t budget) { cfg_.tick_budget = budget; }

 private:
  CoreStatus fault(CoreError e);
  std::uint8_t* translate(std::uint64_t addr, unsigned width);
  CoreStatus execute(const isa::Instruction& insn, std::size_t words);

  CoreConfig cfg_;
  const CallHandlerRegistry* handlers_;
  std::array<std::uint64_t, isa::kRegisterCount> regs_{};
  std::size_t pc_ = 0;
  std::vector<std::uint64_t> prog_;
  std::vector<std::uint8_t> data_;
  std::array<std::uint8_t, kStackSize> stack_{};
  bool in_reset_ = true;
  bool halted_ = false;
  std::optional<CoreError> error_;
  std::uint64_t ticks_ = 0;
  std::uint64_t retired_ = 0;
};

}  // namespace vebpf::vcore
