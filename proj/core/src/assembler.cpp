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

#include "vebpf/assembler.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "vebpf/error.hpp"

namespace vebpf::isa {

namespace {

struct AluName {
  std::string_view name;
  std::uint8_t operation;
};
constexpr AluName kAluNames[] = {
    {"add", op::kAdd}, {"sub", op::kSub}, {"mul", op::kMul}, {"div", op::kDiv},
    {"or", op::kOr},   {"and", op::kAnd}, {"lsh", op::kLsh}, {"rsh", op::kRsh},
    {"neg", op::kNeg}, {"mod", op::kMod}, {"xor", op::kXor}, {"mov", op::kMov},
    {"arsh", op::kArsh},
};

constexpr AluName kJumpNames[] = {
    {"jeq", op::kJeq},   {"jgt", op::kJgt},   {"jge", op::kJge},   {"jset", op::kJset},
    {"jne", op::kJne},   {"jsgt", op::kJsgt}, {"jsge", op::kJsge}, {"jlt", op::kJlt},
    {"jle", op::kJle},   {"jslt", op::kJslt}, {"jsle", op::kJsle},
};

constexpr std::string_view kSizeSuffix[] = {"w", "h", "b", "dw"};  // indexed by size bits >> 3

std::string_view alu_name(std::uint8_t operation) {
  for (const auto& a : kAluNames)
    if (a.operation == operation) return a.name;
  return "?";
}

std::string_view jump_name(std::uint8_t operation) {
  for (const auto& j : kJumpNames)
    if (j.operation == operation) return j.name;
  return "?";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view strip_comment(std::string_view line) {
  std::size_t cut = line.size();
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == ';' || line[i] == '#' || (line[i] == '/' && i + 1 < line.size() && line[i + 1] == '/')) {
      cut = i;
      break;
    }
  }
  return line.substr(0, cut);
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_' || s[0] == '.')) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
  }
  return true;
}

class LineError {
 public:
  explicit LineError(std::size_t line) : line_(line) {}
  [[noreturn]] void fail(ErrorCode code, const std::string& msg) const {
    throw Error(code, "line " + std::to_string(line_) + ": " + msg);
  }
  [[noreturn]] void parse(const std::string& msg) const { fail(ErrorCode::ParseError, msg); }

 private:
  std::size_t line_;
};

// Parses decimal or 0x-prefixed hex with optional sign.
std::optional<__int128> parse_integer(std::string_view s) {
  s = trim(s);
  bool negative = false;
  if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
    negative = s[0] == '-';
    s.remove_prefix(1);
  }
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  }
  if (s.empty()) return std::nullopt;
  unsigned long long magnitude = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), magnitude, base);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  __int128 v = magnitude;
  return negative ? -v : v;
}

std::int32_t parse_imm32(std::string_view s, const LineError& where) {
  auto v = parse_integer(s);
  if (!v) where.parse("expected immediate, got '" + std::string(s) + "'");
  if (*v < std::numeric_limits<std::int32_t>::min() || *v > std::numeric_limits<std::uint32_t>::max()) {
    where.parse("immediate out of 32-bit range: " + std::string(s));
  }
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(static_cast<std::int64_t>(*v)));
}

std::uint8_t parse_register(std::string_view s, const LineError& where) {
  s = trim(s);
  if (s.size() < 2 || s[0] != 'r') where.parse("expected register, got '" + std::string(s) + "'");
  unsigned idx = 0;
  auto [ptr, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), idx);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    where.parse("expected register, got '" + std::string(s) + "'");
  }
  if (idx > kFramePointer) where.fail(ErrorCode::BadRegister, "no such register '" + std::string(s) + "'");
  return static_cast<std::uint8_t>(idx);
}

bool looks_like_register(std::string_view s) {
  s = trim(s);
  return s.size() >= 2 && s[0] == 'r' && std::isdigit(static_cast<unsigned char>(s[1]));
}

struct MemOperand {
  std::uint8_t reg;
  std::int16_t offset;
};

MemOperand parse_memory(std::string_view s, const LineError& where) {
  s = trim(s);
  if (s.size() < 3 || s.front() != '[' || s.back() != ']') {
    where.parse("expected memory operand [rN+off], got '" + std::string(s) + "'");
  }
  s = trim(s.substr(1, s.size() - 2));
  std::size_t sign = s.find_first_of("+-");
  MemOperand m{parse_register(s.substr(0, sign), where), 0};
  if (sign != std::string_view::npos) {
    auto v = parse_integer(s.substr(sign));
    if (!v || *v < std::numeric_limits<std::int16_t>::min() || *v > std::numeric_limits<std::int16_t>::max()) {
      where.parse("bad memory offset in '" + std::string(s) + "'");
    }
    m.offset = static_cast<std::int16_t>(*v);
  }
  return m;
}

std::vector<std::string_view> split_operands(std::string_view s) {
  std::vector<std::string_view> out;
  s = trim(s);
  if (s.empty()) return out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '[') ++depth;
    if (s[i] == ']') --depth;
    if (s[i] == ',' && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(trim(s.substr(start)));
  return out;
}

struct PendingInsn {
  Instruction insn;
  std::size_t line;
  std::size_t word_index;
  std::string target;  // unresolved label, empty if the offset was numeric
};

struct PendingRule {
  std::string name;
  std::size_t line;
  std::size_t start_word;
  std::size_t first_insn;
};

// Splits "jeq32" into ("jeq", true); "add64" into ("add", false).
std::pair<std::string_view, bool> split_width_suffix(std::string_view m) {
  if (m.size() > 2 && m.substr(m.size() - 2) == "32") return {m.substr(0, m.size() - 2), true};
  if (m.size() > 2 && m.substr(m.size() - 2) == "64") return {m.substr(0, m.size() - 2), false};
  return {m, false};
}

void expect_operands(const std::vector<std::string_view>& ops, std::size_t n, std::string_view mnemonic,
                     const LineError& where) {
  if (ops.size() != n) {
    where.parse(std::string(mnemonic) + " expects " + std::to_string(n) + " operand(s), got " +
                std::to_string(ops.size()));
  }
}

// Jump target: numeric offset or label. Returns the label (empty if numeric).
std::string parse_target(std::string_view s, Instruction& insn, const LineError& where) {
  s = trim(s);
  if (auto v = parse_integer(s)) {
    if (*v < std::numeric_limits<std::int16_t>::min() || *v > std::numeric_limits<std::int16_t>::max()) {
      where.fail(ErrorCode::JumpOutOfRange, "jump offset out of 16-bit range: " + std::string(s));
    }
    insn.offset = static_cast<std::int16_t>(*v);
    return {};
  }
  if (!is_identifier(s)) where.parse("bad jump target '" + std::string(s) + "'");
  return std::string(s);
}

PendingInsn parse_instruction(std::string_view text, std::size_t line) {
  LineError where(line);
  std::size_t space = text.find_first_of(" \t");
  std::string_view mnemonic = text.substr(0, space);
  auto ops = split_operands(space == std::string_view::npos ? std::string_view{} : text.substr(space));
  PendingInsn p{{}, line, 0, {}};
  Instruction& insn = p.insn;

  if (mnemonic == "exit") {
    expect_operands(ops, 0, mnemonic, where);
    insn = exit_insn();
  } else if (mnemonic == "call") {
    expect_operands(ops, 1, mnemonic, where);
    insn = call(parse_imm32(ops[0], where));
  } else if (mnemonic == "ja") {
    expect_operands(ops, 1, mnemonic, where);
    insn = ja(0);
    p.target = parse_target(ops[0], insn, where);
  } else if (mnemonic == "lddw") {
    expect_operands(ops, 2, mnemonic, where);
    auto v = parse_integer(ops[1]);
    if (!v || *v < std::numeric_limits<std::int64_t>::min() || *v > std::numeric_limits<std::uint64_t>::max()) {
      where.parse("expected 64-bit immediate, got '" + std::string(ops[1]) + "'");
    }
    insn = lddw(parse_register(ops[0], where), static_cast<std::uint64_t>(*v));
  } else if ((mnemonic.starts_with("be") || mnemonic.starts_with("le")) && mnemonic.size() == 4) {
    expect_operands(ops, 1, mnemonic, where);
    auto width = parse_integer(mnemonic.substr(2));
    if (!width || (*width != 16 && *width != 32 && *width != 64)) where.parse("unknown mnemonic '" + std::string(mnemonic) + "'");
    insn = {mnemonic[0] == 'b' ? op::kToBe : op::kToLe, parse_register(ops[0], where), 0, 0,
            static_cast<std::int32_t>(*width)};
  } else if (mnemonic.starts_with("ldx") || mnemonic.starts_with("stx") || mnemonic.starts_with("st")) {
    const bool is_ldx = mnemonic.starts_with("ldx");
    const bool is_stx = mnemonic.starts_with("stx");
    std::string_view suffix = mnemonic.substr(is_ldx || is_stx ? 3 : 2);
    unsigned width = 0;
    if (suffix == "b") width = 1;
    else if (suffix == "h") width = 2;
    else if (suffix == "w") width = 4;
    else if (suffix == "dw") width = 8;
    else where.parse("unknown mnemonic '" + std::string(mnemonic) + "'");
    expect_operands(ops, 2, mnemonic, where);
    if (is_ldx) {
      MemOperand m = parse_memory(ops[1], where);
      insn = load(width, parse_register(ops[0], where), m.reg, m.offset);
    } else if (is_stx) {
      MemOperand m = parse_memory(ops[0], where);
      insn = store_reg(width, m.reg, parse_register(ops[1], where), m.offset);
    } else {
      MemOperand m = parse_memory(ops[0], where);
      insn = store_imm(width, m.reg, m.offset, parse_imm32(ops[1], where));
    }
  } else {
    auto [base, is32] = split_width_suffix(mnemonic);
    bool matched = false;
    for (const auto& a : kAluNames) {
      if (a.name != base) continue;
      matched = true;
      const std::uint8_t cls = is32 ? op::kAlu : op::kAlu64;
      if (a.operation == op::kNeg) {
        expect_operands(ops, 1, mnemonic, where);
        insn = {static_cast<std::uint8_t>(cls | op::kNeg), parse_register(ops[0], where), 0, 0, 0};
      } else {
        expect_operands(ops, 2, mnemonic, where);
        const std::uint8_t dst = parse_register(ops[0], where);
        if (looks_like_register(ops[1])) {
          insn = {static_cast<std::uint8_t>(cls | op::kSrcX | a.operation), dst, parse_register(ops[1], where), 0, 0};
        } else {
          insn = {static_cast<std::uint8_t>(cls | op::kSrcK | a.operation), dst, 0, 0, parse_imm32(ops[1], where)};
        }
      }
      break;
    }
    for (const auto& j : kJumpNames) {
      if (matched || j.name != base) continue;
      matched = true;
      expect_operands(ops, 3, mnemonic, where);
      const std::uint8_t cls = is32 ? op::kJmp32 : op::kJmp;
      const std::uint8_t dst = parse_register(ops[0], where);
      if (looks_like_register(ops[1])) {
        insn = {static_cast<std::uint8_t>(cls | op::kSrcX | j.operation), dst, parse_register(ops[1], where), 0, 0};
      } else {
        insn = {static_cast<std::uint8_t>(cls | op::kSrcK | j.operation), dst, 0, 0, parse_imm32(ops[1], where)};
      }
      p.target = parse_target(ops[2], insn, where);
    }
    if (!matched) where.parse("unknown mnemonic '" + std::string(mnemonic) + "'");
  }

  try {
    validate(insn);
  } catch (const Error& e) {
    where.fail(e.code(), e.what());
  }
  return p;
}

bool ends_rule(const Instruction& insn) {
  return insn.opcode == op::kExitInsn || insn.opcode == op::kJaInsn;
}

}  // namespace

void validate_layout(const ProgramImage& image) {
  std::size_t expected = 0;
  for (const auto& r : image.rules) {
    if (r.start_word != expected || r.word_count == 0) {
      throw Error(ErrorCode::ParseError, "rule '" + r.name + "' is not contiguous with the previous rule");
    }
    expected += r.word_count;
  }
  if (expected != image.words.size()) {
    throw Error(ErrorCode::ParseError, "rule index covers " + std::to_string(expected) + " words, image has " +
                                           std::to_string(image.words.size()));
  }
}

ProgramImage assemble(std::string_view text) {
  std::vector<PendingInsn> insns;
  std::vector<PendingRule> rules;
  std::map<std::string, std::size_t, std::less<>> labels;
  std::size_t word = 0;
  std::size_t line_no = 0;

  auto close_rule = [&](std::size_t line) {
    if (rules.empty()) return;
    const PendingRule& r = rules.back();
    if (r.first_insn == insns.size()) {
      LineError(r.line).parse("rule '" + r.name + "' has no instructions");
    }
    if (!ends_rule(insns.back().insn)) {
      LineError(line).parse("rule '" + r.name + "' does not end in exit or ja");
    }
  };

  while (!text.empty()) {
    ++line_no;
    std::size_t nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    LineError where(line_no);

    if (line.starts_with(".rule")) {
      std::string_view name = trim(line.substr(5));
      if (!is_identifier(name) || line.size() == 5 || !std::isspace(static_cast<unsigned char>(line[5]))) {
        where.parse("expected '.rule <name>'");
      }
      if (!insns.empty() && rules.empty()) {
        rules.push_back({"rule0", 0, 0, 0});
      }
      close_rule(line_no);
      rules.push_back({std::string(name), line_no, word, insns.size()});
      continue;
    }
    if (line.front() == '.') where.parse("unknown directive '" + std::string(line) + "'");

    std::size_t colon = line.find(':');
    if (colon != std::string_view::npos) {
      std::string_view label = trim(line.substr(0, colon));
      if (!is_identifier(label)) where.parse("bad label '" + std::string(label) + "'");
      if (!labels.emplace(std::string(label), word).second) {
        where.parse("duplicate label '" + std::string(label) + "'");
      }
      line = trim(line.substr(colon + 1));
      if (line.empty()) continue;
    }

    PendingInsn p = parse_instruction(line, line_no);
    p.word_index = word;
    word += p.insn.word_count();
    insns.push_back(std::move(p));
  }

  if (rules.empty() && !insns.empty()) rules.push_back({"rule0", 0, 0, 0});
  close_rule(line_no);

  ProgramImage image;
  image.words.reserve(word);
  for (auto& p : insns) {
    if (!p.target.empty()) {
      auto it = labels.find(p.target);
      if (it == labels.end()) {
        LineError(p.line).fail(ErrorCode::UndefinedLabel, "undefined label '" + p.target + "'");
      }
      const auto delta = static_cast<std::int64_t>(it->second) - static_cast<std::int64_t>(p.word_index + 1);
      if (delta < std::numeric_limits<std::int16_t>::min() || delta > std::numeric_limits<std::int16_t>::max()) {
        LineError(p.line).fail(ErrorCode::JumpOutOfRange,
                               "jump to '" + p.target + "' needs offset " + std::to_string(delta));
      }
      p.insn.offset = static_cast<std::int16_t>(delta);
    }
    encode_into(p.insn, image.words);
  }
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const std::size_t end = i + 1 < rules.size() ? rules[i + 1].start_word : word;
    image.rules.push_back({rules[i].name, static_cast<std::uint32_t>(rules[i].start_word),
                           static_cast<std::uint32_t>(end - rules[i].start_word)});
  }
  return image;
}

std::string format_instruction(const Instruction& insn) {
  std::ostringstream out;
  const std::uint8_t cls = insn_class(insn.opcode);
  const std::uint8_t operation = insn.opcode & op::kOpMask;
  const bool reg_source = (insn.opcode & op::kSrcX) != 0;
  auto offset = [](std::int16_t off) {
    return (off >= 0 ? "+" : "") + std::to_string(off);
  };
  auto mem = [&](std::uint8_t reg) {
    return "[r" + std::to_string(reg) + offset(insn.offset) + "]";
  };

  switch (cls) {
    case op::kLd:
      out << "lddw r" << int(insn.dst) << ", 0x" << std::hex << insn.wide_imm();
      break;
    case op::kLdx:
      out << "ldx" << kSizeSuffix[(insn.opcode & op::kSizeMask) >> 3] << " r" << int(insn.dst) << ", "
          << mem(insn.src);
      break;
    case op::kSt:
      out << "st" << kSizeSuffix[(insn.opcode & op::kSizeMask) >> 3] << " " << mem(insn.dst) << ", " << insn.imm;
      break;
    case op::kStx:
      out << "stx" << kSizeSuffix[(insn.opcode & op::kSizeMask) >> 3] << " " << mem(insn.dst) << ", r"
          << int(insn.src);
      break;
    case op::kAlu:
    case op::kAlu64: {
      const char* suffix = cls == op::kAlu ? "32" : "";
      if (operation == op::kEnd) {
        out << (reg_source ? "be" : "le") << insn.imm << " r" << int(insn.dst);
      } else if (operation == op::kNeg) {
        out << "neg" << suffix << " r" << int(insn.dst);
      } else {
        out << alu_name(operation) << suffix << " r" << int(insn.dst) << ", ";
        if (reg_source) out << "r" << int(insn.src);
        else out << insn.imm;
      }
      break;
    }
    case op::kJmp:
    case op::kJmp32:
      if (insn.opcode == op::kExitInsn) {
        out << "exit";
      } else if (insn.opcode == op::kCallInsn) {
        out << "call " << insn.imm;
      } else if (insn.opcode == op::kJaInsn) {
        out << "ja " << offset(insn.offset);
      } else {
        out << jump_name(operation) << (cls == op::kJmp32 ? "32" : "") << " r" << int(insn.dst) << ", ";
        if (reg_source) out << "r" << int(insn.src);
        else out << insn.imm;
        out << ", " << offset(insn.offset);
      }
      break;
  }
  return out.str();
}

std::string disassemble(const ProgramImage& image) {
  std::ostringstream out;
  const auto decoded = decode_program(image.words);
  std::size_t next_rule = 0;
  for (const auto& d : decoded) {
    while (next_rule < image.rules.size() && image.rules[next_rule].start_word <= d.word_index) {
      if (next_rule > 0) out << "\n";
      out << ".rule " << image.rules[next_rule].name << "\n";
      ++next_rule;
    }
    out << "    " << format_instruction(d.insn) << "\n";
  }
  return out.str();
}

std::string format_rule_index(const ProgramImage& image) {
  std::ostringstream out;
  for (const auto& r : image.rules) out << r.name << " " << r.start_word << " " << r.word_count << "\n";
  return out.str();
}

std::vector<RuleMeta> parse_rule_index(std::string_view text) {
  std::vector<RuleMeta> rules;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::istringstream fields(line);
    RuleMeta r;
    std::string extra;
    if (!(fields >> r.name >> r.start_word >> r.word_count) || (fields >> extra)) {
      LineError(line_no).parse("expected '<rule_name> <start_word> <word_count>'");
    }
    rules.push_back(std::move(r));
  }
  return rules;
}

std::filesystem::path rule_index_path(const std::filesystem::path& bytecode_path) {
  auto p = bytecode_path;
  p += ".rules";
  return p;
}

namespace {
std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}
}  // namespace

void save_flat(const std::filesystem::path& path, const ProgramImage& image) {
  const auto bytes = to_bytes(image.words);
  write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  write_file(rule_index_path(path), format_rule_index(image));
}

ProgramImage load_flat(const std::filesystem::path& path, const std::filesystem::path& index_path) {
  const std::string raw = read_file(path);
  ProgramImage image;
  image.words = from_bytes(std::span(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
  std::filesystem::path idx = index_path.empty() ? rule_index_path(path) : index_path;
  if (!index_path.empty() || std::filesystem::exists(idx)) {
    image.rules = parse_rule_index(read_file(idx));
  } else if (!image.words.empty()) {
    image.rules.push_back({"rule0", 0, static_cast<std::uint32_t>(image.words.size())});
  }
  validate_layout(image);
  return image;
}

}  // namespace vebpf::isa
