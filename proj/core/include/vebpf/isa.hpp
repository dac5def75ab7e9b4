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

// eBPF instruction model.
//
// Each instruction is one little-endian 64-bit word:
//
//   byte 0      opcode
//   byte 1      src_reg << 4 | dst_reg
//   bytes 2-3   signed 16-bit offset
//   bytes 4-7   signed 32-bit immediate
//
// LDDW is the only two-word instruction; the second word holds the high 32
// bits of the constant in its immediate field and zero everywhere else.
//
// Supported: ALU/ALU64 arithmetic, logic, shifts, NEG, MOV and byte swap
// (to-le/to-be), every JMP/JMP32 conditional, JA, CALL, EXIT, LDX/ST/STX in
// B/H/W/DW sizes, and LDDW. Not supported: atomics, tail calls, legacy
// ABS/IND packet loads, LDDW pseudo sources, signed div/mod, sign-extending
// moves and loads, JMP32 JA. Encodings outside this set decode as
// UnknownOpcode, including supported opcodes with nonzero reserved fields.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace vebpf::isa {

inline constexpr std::size_t kRegisterCount = 11;
inline constexpr std::uint8_t kFramePointer = 10;

namespace op {
// classes
inline constexpr std::uint8_t kClassMask = 0x07;
inline constexpr std::uint8_t kLd = 0x00;
inline constexpr std::uint8_t kLdx = 0x01;
inline constexpr std::uint8_t kSt = 0x02;
inline constexpr std::uint8_t kStx = 0x03;
inline constexpr std::uint8_t kAlu = 0x04;
inline constexpr std::uint8_t kJmp = 0x05;
inline constexpr std::uint8_t kJmp32 = 0x06;
inline constexpr std::uint8_t kAlu64 = 0x07;

// source operand
inline constexpr std::uint8_t kSrcK = 0x00;
inline constexpr std::uint8_t kSrcX = 0x08;

// memory size / mode
inline constexpr std::uint8_t kSizeMask = 0x18;
inline constexpr std::uint8_t kSizeW = 0x00;
inline constexpr std::uint8_t kSizeH = 0x08;
inline constexpr std::uint8_t kSizeB = 0x10;
inline constexpr std::uint8_t kSizeDW = 0x18;
inline constexpr std::uint8_t kModeMask = 0xe0;
inline constexpr std::uint8_t kModeImm = 0x00;
inline constexpr std::uint8_t kModeMem = 0x60;

// ALU operation (high nibble)
inline constexpr std::uint8_t kOpMask = 0xf0;
inline constexpr std::uint8_t kAdd = 0x00;
inline constexpr std::uint8_t kSub = 0x10;
inline constexpr std::uint8_t kMul = 0x20;
inline constexpr std::uint8_t kDiv = 0x30;
inline constexpr std::uint8_t kOr = 0x40;
inline constexpr std::uint8_t kAnd = 0x50;
inline constexpr std::uint8_t kLsh = 0x60;
inline constexpr std::uint8_t kRsh = 0x70;
inline constexpr std::uint8_t kNeg = 0x80;
inline constexpr std::uint8_t kMod = 0x90;
inline constexpr std::uint8_t kXor = 0xa0;
inline constexpr std::uint8_t kMov = 0xb0;
inline constexpr std::uint8_t kArsh = 0xc0;
inline constexpr std::uint8_t kEnd = 0xd0;

// JMP operation (high nibble)
inline constexpr std::uint8_t kJa = 0x00;
inline constexpr std::uint8_t kJeq = 0x10;
inline constexpr std::uint8_t kJgt = 0x20;
inline constexpr std::uint8_t kJge = 0x30;
inline constexpr std::uint8_t kJset = 0x40;
inline constexpr std::uint8_t kJne = 0x50;
inline constexpr std::uint8_t kJsgt = 0x60;
inline constexpr std::uint8_t kJsge = 0x70;
inline constexpr std::uint8_t kCall = 0x80;
inline constexpr std::uint8_t kExit = 0x90;
inline constexpr std::uint8_t kJlt = 0xa0;
inline constexpr std::uint8_t kJle = 0xb0;
inline constexpr std::uint8_t kJslt = 0xc0;
inline constexpr std::uint8_t kJsle = 0xd0;

// complete opcodes used often enough to name
inline constexpr std::uint8_t kLddw = kLd | kModeImm | kSizeDW;         // 0x18
inline constexpr std::uint8_t kExitInsn = kJmp | kExit;                 // 0x95
inline constexpr std::uint8_t kCallInsn = kJmp | kCall;                 // 0x85
inline constexpr std::uint8_t kJaInsn = kJmp | kJa;                     // 0x05
inline constexpr std::uint8_t kToLe = kAlu | kEnd | kSrcK;              // 0xd4
inline constexpr std::uint8_t kToBe = kAlu | kEnd | kSrcX;              // 0xdc
}  // namespace op

constexpr std::uint8_t insn_class(std::uint8_t opcode) { return opcode & op::kClassMask; }

/// Access width in bytes for a LDX/ST/STX opcode.
constexpr unsigned access_width(std::uint8_t opcode) {
  switch (opcode & op::kSizeMask) {
    case op::kSizeB: return 1;
    case op::kSizeH: return 2;
    case op::kSizeW: return 4;
    default: return 8;
  }
}

struct Instruction {
  std::uint8_t opcode = 0;
  std::uint8_t dst = 0;
  std::uint8_t src = 0;
  std::int16_t offset = 0;
  std::int32_t imm = 0;
  /// High half of the 64-bit constant; only meaningful for LDDW.
  std::int32_t imm_hi = 0;

  bool is_wide() const { return opcode == op::kLddw; }
  std::size_t word_count() const { return is_wide() ? 2 : 1; }
  std::uint64_t wide_imm() const {
    return static_cast<std::uint32_t>(imm) |
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(imm_hi)) << 32);
  }

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

/// True when `opcode` belongs to the supported set (ignores reserved fields).
bool is_supported_opcode(std::uint8_t opcode);

/// Throws Error{UnknownOpcode|BadRegister} if `insn` is not a well-formed
/// member of the supported set.
void validate(const Instruction& insn);

/// Decodes one instruction. `next_word` is consumed only for LDDW.
Instruction decode(std::uint64_t word, std::optional<std::uint64_t> next_word = std::nullopt);

/// Encodes a well-formed instruction into one word, or two for LDDW.
/// Only the first `word_count()` entries of the result are meaningful.
std::array<std::uint64_t, 2> encode(const Instruction& insn);

/// Appends the encoding of `insn` to `out`.
void encode_into(const Instruction& insn, std::vector<std::uint64_t>& out);

/// Decodes an entire word sequence; LDDW pairs yield one entry.
struct DecodedInsn {
  std::size_t word_index;
  Instruction insn;
};
std::vector<DecodedInsn> decode_program(std::span<const std::uint64_t> words);

// Builders for the common forms.
Instruction alu64_imm(std::uint8_t operation, std::uint8_t dst, std::int32_t imm);
Instruction alu64_reg(std::uint8_t operation, std::uint8_t dst, std::uint8_t src);
Instruction alu32_imm(std::uint8_t operation, std::uint8_t dst, std::int32_t imm);
Instruction alu32_reg(std::uint8_t operation, std::uint8_t dst, std::uint8_t src);
Instruction mov64_imm(std::uint8_t dst, std::int32_t imm);
Instruction lddw(std::uint8_t dst, std::uint64_t value);
Instruction jump_imm(std::uint8_t operation, std::uint8_t dst, std::int32_t imm, std::int16_t offset);
Instruction jump_reg(std::uint8_t operation, std::uint8_t dst, std::uint8_t src, std::int16_t offset);
Instruction ja(std::int16_t offset);
Instruction load(unsigned width, std::uint8_t dst, std::uint8_t src, std::int16_t offset);
Instruction store_imm(unsigned width, std::uint8_t dst, std::int16_t offset, std::int32_t imm);
Instruction store_reg(unsigned width, std::uint8_t dst, std::uint8_t src, std::int16_t offset);
Instruction call(std::int32_t helper_id);
Instruction exit_insn();

/// Little-endian byte image of a word sequence (the flat bytecode format).
std::vector<std::uint8_t> to_bytes(std::span<const std::uint64_t> words);
/// Inverse of to_bytes; throws ParseError if the length is not a multiple of 8.
std::vector<std::uint64_t> from_bytes(std::span<const std::uint8_t> bytes);

}  // namespace vebpf::isa
