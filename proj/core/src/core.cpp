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

#include "vebpf/core.hpp"

#include <bit>
#include <cstring>
#include <string>

#include "vebpf/error.hpp"

namespace vebpf::vcore {

using namespace isa;

std::string_view to_string(CoreError e) {
  switch (e) {
    case CoreError::OutOfBoundsLoad: return "OutOfBoundsLoad";
    case CoreError::OutOfBoundsStore: return "OutOfBoundsStore";
    case CoreError::PcOutOfRange: return "PcOutOfRange";
    case CoreError::UnknownOpcode: return "UnknownOpcode";
    case CoreError::UnknownHelper: return "UnknownHelper";
    case CoreError::TickBudgetExceeded: return "TickBudgetExceeded";
  }
  return "Unknown";
}

Core::Core(CoreConfig cfg, const CallHandlerRegistry* handlers)
    : cfg_(cfg), handlers_(handlers), prog_(cfg.prog_depth, 0), data_(cfg.data_depth, 0) {
  regs_[kFramePointer] = kStackTop;
}

CoreStatus Core::status() const {
  if (error_) return CoreStatus::Errored;
  if (halted_) return CoreStatus::Halted;
  return CoreStatus::Running;
}

void Core::assert_reset() { in_reset_ = true; }

std::uint64_t Core::reset(std::size_t start_pc) {
  if (!in_reset_) throw Error(ErrorCode::NotInReset, "reset(pc) requires the core to be held in reset");
  if (start_pc >= cfg_.prog_depth) {
    throw Error(ErrorCode::StartPcOutOfRange,
                "start pc " + std::to_string(start_pc) + " >= program depth " + std::to_string(cfg_.prog_depth));
  }
  pc_ = start_pc;
  regs_[0] = 0;
  for (unsigned r = 6; r <= 9; ++r) regs_[r] = 0;
  regs_[kFramePointer] = kStackTop;
  ticks_ = 0;
  retired_ = 0;
  halted_ = false;
  error_.reset();
  return kResetCycles;
}

void Core::release() { in_reset_ = false; }

void Core::set_input_register(unsigned index, std::uint64_t value) {
  if (index < 1 || index > 5) throw Error(ErrorCode::BadRegister, "input registers are r1-r5");
  regs_[index] = value;
}

void Core::write_data_word(std::size_t byte_addr, std::uint64_t word, unsigned width) {
  if (!in_reset_) throw Error(ErrorCode::NotInReset, "data bus writes require the core to be held in reset");
  if ((width != 1 && width != 2 && width != 4 && width != 8) || byte_addr > cfg_.data_depth ||
      width > cfg_.data_depth - byte_addr) {
    throw Error(ErrorCode::OutOfBoundsStore, "data write of " + std::to_string(width) + " bytes at " +
                                                 std::to_string(byte_addr) + " exceeds data depth " +
                                                 std::to_string(cfg_.data_depth));
  }
  for (unsigned i = 0; i < width; ++i) data_[byte_addr + i] = static_cast<std::uint8_t>(word >> (8 * i));
}

void Core::write_prog_word(std::size_t word_index, std::uint64_t word) {
  if (!in_reset_) throw Error(ErrorCode::NotInReset, "program bus writes require the core to be held in reset");
  if (word_index >= cfg_.prog_depth) {
    throw Error(ErrorCode::OutOfBoundsStore, "program write at word " + std::to_string(word_index) +
                                                 " exceeds program depth " + std::to_string(cfg_.prog_depth));
  }
  prog_[word_index] = word;
}

CoreStatus Core::fault(CoreError e) {
  error_ = e;
  return CoreStatus::Errored;
}

std::uint8_t* Core::translate(std::uint64_t addr, unsigned width) {
  if (addr < data_.size() && width <= data_.size() - addr) return data_.data() + addr;
  if (addr >= kStackBase && addr < kStackTop && width <= kStackTop - addr) return stack_.data() + (addr - kStackBase);
  return nullptr;
}

CoreStatus Core::step() {
  if (in_reset_ || halted_ || error_) return status();
  if (pc_ >= prog_.size()) return fault(CoreError::PcOutOfRange);

  Instruction insn;
  try {
    std::optional<std::uint64_t> next;
    if (pc_ + 1 < prog_.size()) next = prog_[pc_ + 1];
    insn = decode(prog_[pc_], next);
  } catch (const Error&) {
    return fault(CoreError::UnknownOpcode);
  }
  const CoreStatus s = execute(insn, insn.word_count());
  if (s != CoreStatus::Running) return s;
  if (ticks_ > cfg_.tick_budget) return fault(CoreError::TickBudgetExceeded);
  return s;
}

CoreStatus Core::run_until_halt(std::uint64_t tick_budget) {
  cfg_.tick_budget = tick_budget;
  CoreStatus s = status();
  while (!in_reset_ && s == CoreStatus::Running) s = step();
  return s;
}

namespace {

std::uint64_t load_le(const std::uint8_t* p, unsigned width) {
  std::uint64_t v = 0;
  for (unsigned i = width; i-- > 0;) v = (v << 8) | p[i];
  return v;
}

void store_le(std::uint8_t* p, std::uint64_t v, unsigned width) {
  for (unsigned i = 0; i < width; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint64_t alu64(std::uint8_t operation, std::uint64_t dst, std::uint64_t src) {
  switch (operation) {
    case op::kAdd: return dst + src;
    case op::kSub: return dst - src;
    case op::kMul: return dst * src;
    case op::kDiv: return src == 0 ? 0 : dst / src;
    case op::kOr: return dst | src;
    case op::kAnd: return dst & src;
    case op::kLsh: return dst << (src & 63);
    case op::kRsh: return dst >> (src & 63);
    case op::kNeg: return ~dst + 1;
    case op::kMod: return src == 0 ? dst : dst % src;
    case op::kXor: return dst ^ src;
    case op::kMov: return src;
    case op::kArsh: return static_cast<std::uint64_t>(static_cast<std::int64_t>(dst) >> (src & 63));
  }
  return dst;
}

std::uint32_t alu32(std::uint8_t operation, std::uint32_t dst, std::uint32_t src) {
  switch (operation) {
    case op::kAdd: return dst + src;
    case op::kSub: return dst - src;
    case op::kMul: return dst * src;
    case op::kDiv: return src == 0 ? 0 : dst / src;
    case op::kOr: return dst | src;
    case op::kAnd: return dst & src;
    case op::kLsh: return dst << (src & 31);
    case op::kRsh: return dst >> (src & 31);
    case op::kNeg: return ~dst + 1;
    case op::kMod: return src == 0 ? dst : dst % src;
    case op::kXor: return dst ^ src;
    case op::kMov: return src;
    case op::kArsh: return static_cast<std::uint32_t>(static_cast<std::int32_t>(dst) >> (src & 31));
  }
  return dst;
}

std::uint64_t byte_swap(std::uint64_t v, std::int32_t width, bool to_big_endian) {
  switch (width) {
    case 16: {
      auto x = static_cast<std::uint16_t>(v);
      return to_big_endian ? static_cast<std::uint16_t>((x >> 8) | (x << 8)) : x;
    }
    case 32: {
      auto x = static_cast<std::uint32_t>(v);
      return to_big_endian ? __builtin_bswap32(x) : x;
    }
    default:
      return to_big_endian ? __builtin_bswap64(v) : v;
  }
}

template <typename U, typename S>
bool compare(std::uint8_t operation, U a, U b) {
  switch (operation) {
    case op::kJeq: return a == b;
    case op::kJgt: return a > b;
    case op::kJge: return a >= b;
    case op::kJset: return (a & b) != 0;
    case op::kJne: return a != b;
    case op::kJsgt: return static_cast<S>(a) > static_cast<S>(b);
    case op::kJsge: return static_cast<S>(a) >= static_cast<S>(b);
    case op::kJlt: return a < b;
    case op::kJle: return a <= b;
    case op::kJslt: return static_cast<S>(a) < static_cast<S>(b);
    case op::kJsle: return static_cast<S>(a) <= static_cast<S>(b);
  }
  return false;
}

}  // namespace

CoreStatus Core::execute(const Instruction& insn, std::size_t words) {
  const std::uint8_t cls = insn_class(insn.opcode);
  const std::uint8_t operation = insn.opcode & op::kOpMask;
  const bool reg_source = (insn.opcode & op::kSrcX) != 0;
  std::uint64_t& dst = regs_[insn.dst];
  const std::uint64_t src = regs_[insn.src];
  const auto imm64 = static_cast<std::uint64_t>(static_cast<std::int64_t>(insn.imm));
  std::size_t next_pc = pc_ + words;
  std::uint64_t cost = 1;

  switch (cls) {
    case op::kLd:
      dst = insn.wide_imm();
      break;
    case op::kLdx: {
      const unsigned width = access_width(insn.opcode);
      const std::uint8_t* p = translate(src + static_cast<std::uint64_t>(static_cast<std::int64_t>(insn.offset)), width);
      if (!p) return fault(CoreError::OutOfBoundsLoad);
      dst = load_le(p, width);
      break;
    }
    case op::kSt:
    case op::kStx: {
      const unsigned width = access_width(insn.opcode);
      std::uint8_t* p = translate(dst + static_cast<std::uint64_t>(static_cast<std::int64_t>(insn.offset)), width);
      if (!p) return fault(CoreError::OutOfBoundsStore);
      store_le(p, cls == op::kSt ? imm64 : src, width);
      break;
    }
    case op::kAlu64:
      dst = alu64(operation, dst, reg_source ? src : imm64);
      break;
    case op::kAlu:
      if (operation == op::kEnd) {
        dst = byte_swap(dst, insn.imm, reg_source);
      } else {
        dst = alu32(operation, static_cast<std::uint32_t>(dst),
                    reg_source ? static_cast<std::uint32_t>(src) : static_cast<std::uint32_t>(insn.imm));
      }
      break;
    case op::kJmp:
      if (insn.opcode == op::kExitInsn) {
        ++ticks_;
        ++retired_;
        halted_ = true;
        return CoreStatus::Halted;
      }
      if (insn.opcode == op::kCallInsn) {
        const HelperFn* fn = handlers_ ? handlers_->find(insn.imm) : nullptr;
        if (!fn) return fault(CoreError::UnknownHelper);
        std::array<std::uint64_t, 5> args{regs_[1], regs_[2], regs_[3], regs_[4], regs_[5]};
        const HelperResult r = (*fn)(std::span<const std::uint64_t, 5>(args));
        regs_[0] = r.r0;
        cost += r.extra_ticks;
        break;
      }
      if (insn.opcode == op::kJaInsn ||
          compare<std::uint64_t, std::int64_t>(operation, dst, reg_source ? src : imm64)) {
        next_pc = static_cast<std::size_t>(static_cast<std::int64_t>(pc_) + 1 + insn.offset);
      }
      break;
    case op::kJmp32:
      if (compare<std::uint32_t, std::int32_t>(operation, static_cast<std::uint32_t>(dst),
                                               reg_source ? static_cast<std::uint32_t>(src)
                                                          : static_cast<std::uint32_t>(insn.imm))) {
        next_pc = static_cast<std::size_t>(static_cast<std::int64_t>(pc_) + 1 + insn.offset);
      }
      break;
  }
  ticks_ += cost;
  ++retired_;
  pc_ = next_pc;
  return CoreStatus::Running;
}

}  // namespace vebpf::vcore
