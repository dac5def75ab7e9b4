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

// Text assembler/disassembler and the flat bytecode file format.
//
// Assembly syntax, one instruction per line:
//
//   .rule block_tftp          ; starts a new rule
//   start:                    ; label (may share a line with an instruction)
//       mov r0, 2
//       ldxh r3, [r1+12]
//       jne r3, 8, out        ; jump target: label or signed word offset (+1, -3)
//       stxdw [r10-8], r3
//       lddw r4, 0x100000000
//       be16 r3
//       jeq32 r3, -1, +1
//   out:
//       exit
//
// ALU mnemonics take a "32" suffix for the 32-bit class; jumps take "32"
// for JMP32. Comments start with ';', '#' or "//". Instructions before the
// first .rule form an implicit rule named "rule0". Every rule must end in
// exit or ja.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vebpf/isa.hpp"

namespace vebpf::isa {

/// Location of one rule inside the shared program image. The rule id is its
/// position in ProgramImage::rules.
struct RuleMeta {
  std::string name;
  std::uint32_t start_word = 0;
  std::uint32_t word_count = 0;

  friend bool operator==(const RuleMeta&, const RuleMeta&) = default;
};

struct ProgramImage {
  std::vector<std::uint64_t> words;
  std::vector<RuleMeta> rules;

  friend bool operator==(const ProgramImage&, const ProgramImage&) = default;
};

/// Checks that rule regions are contiguous, disjoint, non-empty and cover
/// `words` exactly. Throws ParseError otherwise.
void validate_layout(const ProgramImage& image);

ProgramImage assemble(std::string_view text);

/// Canonical listing; assemble(disassemble(img)).words == img.words.
std::string disassemble(const ProgramImage& image);

/// One instruction in canonical syntax, jump targets as signed offsets.
std::string format_instruction(const Instruction& insn);

// Flat bytecode: raw little-endian words, no header. The rule index sidecar
// holds one "<rule_name> <start_word> <word_count>" line per rule.
std::string format_rule_index(const ProgramImage& image);
std::vector<RuleMeta> parse_rule_index(std::string_view text);

/// Writes `path` (flat bytecode) and `path` + ".rules" (index sidecar).
void save_flat(const std::filesystem::path& path, const ProgramImage& image);

/// Reads flat bytecode; uses the sidecar at `index_path` when given, else
/// `path` + ".rules" if present, else treats the whole image as one rule.
ProgramImage load_flat(const std::filesystem::path& path,
                       const std::filesystem::path& index_path = {});

/// Sidecar path convention used by save_flat/load_flat.
std::filesystem::path rule_index_path(const std::filesystem::path& bytecode_path);

}  // namespace vebpf::isa
