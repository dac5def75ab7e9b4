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

#include "vebpf/isa.hpp"

#include <sstream>

#include "vebpf/error.hpp"

namespace vebpf::isa {

namespace {

std::string hex_byte(std::uint8_t b) {
  static constexpr char kDigits[] = "0123456789abcdef";
  return {'0', 'x', kDigits[b >> 4], kDigits[b & 0xf]};
}

[[noreturn]] void unknown_opcode(std::uint8_t opcode, const char* why) {
  throw Error(ErrorCode::UnknownOpcode, "unsupported instruction " + hex_byte(opcode) + ": " + why);
}

bool is_alu_operation(std::uint8_t operation) {
  switch (operation) {
    case op::kAdd: case op::kSub: case op::kMul: case op::kDiv:
    case op::kOr: case op::kAnd: case op::kLsh: case op::kRsh:
    case op::kNeg: case op::kMod: case op::kXor: case op::kMov:
    case op::kArsh: case op::kEnd:
      return true;
    default:
      return false;
  }
}

bool is_conditional_jump(std::uint8_t operation) {
  switch (operation) {
    case op::kJeq: case op::kJgt: case op::kJge: case op::kJset:
    case op::kJne: case op::kJsgt: case op::kJsge: case op::kJlt:
    case op::kJle: case op::kJslt: case op::kJsle:
      return true;
    default:
      return false;
  }
}

std::uint64_t pack(std::uint8_t opcode, std::uint8_t dst, std::uint8_t src, std::int16_t offset,
                   std::int32_t imm) {
  return static_cast<std::uint64_t>(opcode) |
         (static_cast<std::uint64_t>((src << 4) | (dst & 0xf)) << 8) |
         (static_cast<std::uint64_t>(static_cast<std::uint16_t>(offset)) << 16) |
         (static_cast<std::uint64_t>(static_cast<std::uint32_t>(imm)) << 32);
}

}  // namespace

bool is_supported_opcode(std::uint8_t opcode) {
  const std::uint8_t cls = insn_class(opcode);
  const std::uint8_t operation = opcode & op::kOpMask;
  const bool reg_source = (opcode & op::kSrcX) != 0;
  switch (cls) {
    case op::kLd:
      return opcode == op::kLddw;
    case op::kLdx:
    case op::kSt:
    case op::kStx:
      return (opcode & op::kModeMask) == op::kModeMem;
    case op::kAlu:
    case op::kAlu64:
      if (!is_alu_operation(operation)) return false;
      if (operation == op::kNeg) return !reg_source;
      if (operation == op::kEnd) return cls == op::kAlu;
      return true;
    case op::kJmp:
      if (operation == op::kJa || operation == op::kCall || operation == op::kExit)
        return !reg_source;
      return is_conditional_jump(operation);
    case op::kJmp32:
      return is_conditional_jump(operation);
  }
  return false;
}

void validate(const Instruction& insn) {
  const std::uint8_t opcode = insn.opcode;
  if (!is_supported_opcode(opcode)) unknown_opcode(opcode, "opcode not in supported set");
  if (insn.dst > kFramePointer || insn.src > kFramePointer) {
    throw Error(ErrorCode::BadRegister, "register index out of range in " + hex_byte(opcode));
  }
  if (!insn.is_wide() && insn.imm_hi != 0) unknown_opcode(opcode, "high immediate on non-wide instruction");

  const std::uint8_t cls = insn_class(opcode);
  const std::uint8_t operation = opcode & op::kOpMask;
  const bool reg_source = (opcode & op::kSrcX) != 0;
  auto writes_frame_pointer = [&] {
    throw Error(ErrorCode::BadRegister, "r10 is read-only (" + hex_byte(opcode) + ")");
  };

  switch (cls) {
    case op::kLd:
      if (insn.src != 0) unknown_opcode(opcode, "lddw pseudo sources are not supported");
      if (insn.offset != 0) unknown_opcode(opcode, "reserved offset must be zero");
      if (insn.dst == kFramePointer) writes_frame_pointer();
      return;
    case op::kLdx:
      if (insn.imm != 0) unknown_opcode(opcode, "reserved immediate must be zero");
      if (insn.dst == kFramePointer) writes_frame_pointer();
      return;
    case op::kSt:
      if (insn.src != 0) unknown_opcode(opcode, "reserved source must be zero");
      return;
    case op::kStx:
      if (insn.imm != 0) unknown_opcode(opcode, "reserved immediate must be zero");
      return;
    case op::kAlu:
    case op::kAlu64:
      if (insn.offset != 0) unknown_opcode(opcode, "reserved offset must be zero");
      if (insn.dst == kFramePointer) writes_frame_pointer();
      if (operation == op::kNeg) {
        if (insn.src != 0 || insn.imm != 0) unknown_opcode(opcode, "neg takes no operand");
      } else if (operation == op::kEnd) {
        if (insn.src != 0) unknown_opcode(opcode, "reserved source must be zero");
        if (insn.imm != 16 && insn.imm != 32 && insn.imm != 64)
          unknown_opcode(opcode, "byte swap width must be 16, 32 or 64");
      } else if (reg_source) {
        if (insn.imm != 0) unknown_opcode(opcode, "reserved immediate must be zero");
      } else if (insn.src != 0) {
        unknown_opcode(opcode, "reserved source must be zero");
      }
      return;
    case op::kJmp:
    case op::kJmp32:
      if (operation == op::kJa) {
        if (insn.dst || insn.src || insn.imm) unknown_opcode(opcode, "ja takes only an offset");
      } else if (operation == op::kCall) {
        if (insn.dst || insn.src || insn.offset) unknown_opcode(opcode, "call takes only a helper id");
      } else if (operation == op::kExit) {
        if (insn.dst || insn.src || insn.offset || insn.imm) unknown_opcode(opcode, "exit takes no operands");
      } else if (reg_source) {
        if (insn.imm != 0) unknown_opcode(opcode, "reserved immediate must be zero");
      } else if (insn.src != 0) {
        unknown_opcode(opcode, "reserved source must be zero");
      }
      return;
  }
}

Instruction decode(std::uint64_t word, std::optional<std::uint64_t> next_word) {
  Instruction insn;
  insn.opcode = static_cast<std::uint8_t>(word);
  const auto regs = static_cast<std::uint8_t>(word >> 8);
  insn.dst = regs & 0xf;
  insn.src = regs >> 4;
  insn.offset = static_cast<std::int16_t>(static_cast<std::uint16_t>(word >> 16));
  insn.imm = static_cast<std::int32_t>(static_cast<std::uint32_t>(word >> 32));
  if (insn.is_wide()) {
    if (!next_word) {
      throw Error(ErrorCode::TruncatedWideImmediate, "lddw is missing its second word");
    }
    if ((*next_word & 0xffffffffULL) != 0) unknown_opcode(insn.opcode, "lddw second word has nonzero fields");
    insn.imm_hi = static_cast<std::int32_t>(static_cast<std::uint32_t>(*next_word >> 32));
  }
  validate(insn);
  return insn;
}

std::array<std::uint64_t, 2> encode(const Instruction& insn) {
  std::array<std::uint64_t, 2> words{pack(insn.opcode, insn.dst, insn.src, insn.offset, insn.imm), 0};
  if (insn.is_wide()) words[1] = pack(0, 0, 0, 0, insn.imm_hi);
  return words;
}

void encode_into(const Instruction& insn, std::vector<std::uint64_t>& out) {
  const auto words = encode(insn);
  out.insert(out.end(), words.begin(), words.begin() + static_cast<std::ptrdiff_t>(insn.word_count()));
}

std::vector<DecodedInsn> decode_program(std::span<const std::uint64_t> words) {
  std::vector<DecodedInsn> out;
  out.reserve(words.size());
  for (std::size_t i = 0; i < words.size();) {
    std::optional<std::uint64_t> next;
    if (i + 1 < words.size()) next = words[i + 1];
    Instruction insn = decode(words[i], next);
    out.push_back({i, insn});
    i += insn.word_count();
  }
  return out;
}

Instruction alu64_imm(std::uint8_t operation, std::uint8_t dst, std::int32_t imm) {
  return {static_cast<std::uint8_t>(op::kAlu64 | op::kSrcK | operation), dst, 0, 0, imm};
}
Instruction alu64_reg(std::uint8_t operation, std::uint8_t dst, std::uint8_t src) {
  return {static_cast<std::uint8_t>(op::kAlu64 | op::kSrcX | operation), dst, src, 0, 0};
}
Instruction alu32_imm(std::uint8_t operation, std::uint8_t dst, std::int32_t imm) {
  return {static_cast<std::uint8_t>(op::kAlu | op::kSrcK | operation), dst, 0, 0, imm};
}
Instruction alu32_reg(std::uint8_t operation, std::uint8_t dst, std::uint8_t src) {
  return {static_cast<std::uint8_t>(op::kAlu | op::kSrcX | operation), dst, src, 0, 0};
}
Instruction mov64_imm(std::uint8_t dst, std::int32_t imm) { return alu64_imm(op::kMov, dst, imm); }

Instruction lddw(std::uint8_t dst, std::uint64_t value) {
  return {op::kLddw, dst, 0, 0, static_cast<std::int32_t>(static_cast<std::uint32_t>(value)),
          static_cast<std::int32_t>(static_cast<std::uint32_t>(value >> 32))};
}

Instruction jump_imm(std::uint8_t operation, std::uint8_t dst, std::int32_t imm, std::int16_t offset) {
  return {static_cast<std::uint8_t>(op::kJmp | op::kSrcK | operation), dst, 0, offset, imm};
}
Instruction jump_reg(std::uint8_t operation, std::uint8_t dst, std::uint8_t src, std::int16_t offset) {
  return {static_cast<std::uint8_t>(op::kJmp | op::kSrcX | operation), dst, src, offset, 0};
}
Instruction ja(std::int16_t offset) { return {op::kJaInsn, 0, 0, offset, 0}; }

namespace {
std::uint8_t size_bits(unsigned width) {
  switch (width) {
    case 1: return op::kSizeB;
    case 2: return op::kSizeH;
    case 4: return op::kSizeW;
    case 8: return op::kSizeDW;
  }
  throw Error(ErrorCode::UnknownOpcode, "access width must be 1, 2, 4 or 8");
}
}  // namespace

Instruction load(unsigned width, std::uint8_t dst, std::uint8_t src, std::int16_t offset) {
  return {static_cast<std::uint8_t>(op::kLdx | op::kModeMem | size_bits(width)), dst, src, offset, 0};
}
Instruction store_imm(unsigned width, std::uint8_t dst, std::int16_t offset, std::int32_t imm) {
  return {static_cast<std::uint8_t>(op::kSt | op::kModeMem | size_bits(width)), dst, 0, offset, imm};
}
Instruction store_reg(unsigned width, std::uint8_t dst, std::uint8_t src, std::int16_t offset) {
  return {static_cast<std::uint8_t>(op::kStx | op::kModeMem | size_bits(width)), dst, src, offset, 0};
}
Instruction call(std::int32_t helper_id) { return {op::kCallInsn, 0, 0, 0, helper_id}; }
Instruction exit_insn() { return {op::kExitInsn, 0, 0, 0, 0}; }

std::vector<std::uint8_t> to_bytes(std::span<const std::uint64_t> words) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(words.size() * 8);
  for (std::uint64_t w : words) {
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(w >> (8 * i)));
  }
  return bytes;
}

std::vector<std::uint64_t> from_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % 8 != 0) {
    std::ostringstream msg;
    msg << "bytecode length " << bytes.size() << " is not a multiple of 8";
    throw Error(ErrorCode::ParseError, msg.str());
  }
  std::vector<std::uint64_t> words(bytes.size() / 8);
  for (std::size_t w = 0; w < words.size(); ++w) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[w * 8 + static_cast<std::size_t>(i)];
    words[w] = v;
  }
  return words;
}

}  // namespace vebpf::isa
