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

// vebpf: assemble rules, run simulations and sweeps, compare against the
// sequential baseline, and dump event traces.
//
// Exit status: 0 success, 1 usage, configuration or input error,
// 2 runtime error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vebpf/assembler.hpp"
#include "vebpf/error.hpp"
#include "vebpf/experiment.hpp"
#include "vebpf/rules.hpp"

namespace {

using namespace vebpf;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidSpec:
    case ErrorCode::ParseError:
    case ErrorCode::UndefinedLabel:
    case ErrorCode::JumpOutOfRange:
    case ErrorCode::BadRegister:
    case ErrorCode::UnknownOpcode:
    case ErrorCode::TruncatedWideImmediate:
    case ErrorCode::BadMagic:
    case ErrorCode::TruncatedRecord:
    case ErrorCode::UnsupportedLinkType:
    case ErrorCode::Io:
      return true;
    default:
      return false;
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << text;
}

std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, "bad number '" + item + "' in list '" + text + "'");
    }
  }
  if (out.empty()) throw Error(ErrorCode::InvalidConfig, "empty list");
  return out;
}

struct SimOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> cores;
  std::string sweep;
  std::string rules;
  std::string pcap;
  std::string traffic;
  std::optional<std::uint64_t> count;
  std::string sizes;
  std::optional<std::uint64_t> rate;
  std::string out;
  std::string format;
  std::optional<std::size_t> threads;
};

void add_sim_options(CLI::App* cmd, SimOptions& o) {
  cmd->add_option("--config", o.config, "JSON run configuration");
  cmd->add_option("--seed", o.seed, "Synthetic traffic seed");
  cmd->add_option("--cores", o.cores, "Number of cores")->check(CLI::PositiveNumber);
  cmd->add_option("--sweep", o.sweep, "Comma-separated core counts, e.g. 1,2,4,8,12");
  cmd->add_option("--rules", o.rules, "Built-in rule types (e.g. 4 or 1,3) or a .asm/.bin ruleset");
  cmd->add_option("--pcap", o.pcap, "Replay packets from a pcap file");
  cmd->add_option("--traffic", o.traffic, "Synthetic traffic mix: benign, type1..type4");
  cmd->add_option("--count", o.count, "Synthetic packet count");
  cmd->add_option("--sizes", o.sizes, "Synthetic packet sizes, comma-separated");
  cmd->add_option("--rate", o.rate, "Offered rate in bits per second");
  cmd->add_option("--out", o.out, "Output file (default: none for run/compare, stdout for trace)");
  cmd->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--threads", o.threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);
}

bool looks_like_rule_types(const std::string& s) {
  try {
    rules::parse_rule_types(s);
    return true;
  } catch (const Error&) {
    return false;
  }
}

experiment::RunConfig build_config(const SimOptions& o) {
  experiment::RunConfig cfg = o.config.empty() ? experiment::RunConfig{} : experiment::load_config(o.config);
  if (o.cores) {
    cfg.engine.n_cores = *o.cores;
    cfg.sweep.clear();
  }
  if (!o.sweep.empty()) cfg.sweep = parse_list(o.sweep);
  if (!o.rules.empty()) {
    if (looks_like_rule_types(o.rules)) {
      cfg.ruleset.types = rules::parse_rule_types(o.rules);
      cfg.ruleset.path.reset();
    } else {
      cfg.ruleset.path = o.rules;
    }
  }
  if (!o.pcap.empty() && !o.traffic.empty()) {
    throw Error(ErrorCode::InvalidConfig, "--pcap and --traffic are mutually exclusive");
  }
  if (!o.pcap.empty()) {
    experiment::PcapSource src;
    src.path = o.pcap;
    if (const auto* old = std::get_if<experiment::PcapSource>(&cfg.traffic)) src.rate_bps = old->rate_bps;
    cfg.traffic = src;
  }
  const bool synthetic_flags = !o.traffic.empty() || o.seed || o.count || !o.sizes.empty();
  if (synthetic_flags) {
    if (std::holds_alternative<experiment::PcapSource>(cfg.traffic)) {
      if (!o.pcap.empty()) throw Error(ErrorCode::InvalidConfig, "synthetic traffic options conflict with --pcap");
      cfg.traffic = pktio::TrafficSpec{};
    }
    auto& spec = std::get<pktio::TrafficSpec>(cfg.traffic);
    if (!o.traffic.empty()) {
      auto mix = pktio::parse_traffic_mix(o.traffic);
      if (!mix) throw Error(ErrorCode::InvalidConfig, "--traffic must be benign or type1..type4");
      spec.mix = *mix;
    }
    if (o.seed) spec.seed = *o.seed;
    if (o.count) spec.count = *o.count;
    if (!o.sizes.empty()) {
      spec.sizes.clear();
      for (auto s : parse_list(o.sizes)) spec.sizes.push_back(static_cast<std::uint32_t>(s));
    }
  }
  if (o.rate) {
    if (auto* spec = std::get_if<pktio::TrafficSpec>(&cfg.traffic)) spec->rate_bps = *o.rate;
    else std::get<experiment::PcapSource>(cfg.traffic).rate_bps = *o.rate;
  }
  if (!o.out.empty()) cfg.out = o.out;
  if (!o.format.empty()) cfg.format = *experiment::parse_report_format(o.format);
  if (o.threads) cfg.threads = *o.threads;
  experiment::validate(cfg);
  return cfg;
}

int cmd_asm(const std::string& input, std::string output) {
  const isa::ProgramImage image = isa::assemble(read_text(input));
  if (output.empty()) {
    std::filesystem::path p(input);
    output = p.replace_extension(".bin").string();
  }
  isa::save_flat(output, image);
  std::cout << "wrote " << output << " (" << image.words.size() << " words, " << image.rules.size()
            << " rules) and " << isa::rule_index_path(output).string() << "\n";
  return kExitOk;
}

int cmd_disasm(const std::string& input, const std::string& index, const std::string& output) {
  const isa::ProgramImage image = isa::load_flat(input, index);
  write_text(output, isa::disassemble(image));
  return kExitOk;
}

int cmd_rules(const std::string& types, const std::string& output) {
  write_text(output, rules::ruleset_assembly(rules::parse_rule_types(types)));
  return kExitOk;
}

int cmd_run(const SimOptions& o, bool baseline) {
  experiment::RunConfig cfg = build_config(o);
  if (baseline) cfg.baseline = true;
  const experiment::RunReport report = experiment::run(cfg);
  std::cout << experiment::summary_table(report);
  if (cfg.out) {
    experiment::write_report(report, *cfg.out, cfg.format);
    std::cout << "report written to " << cfg.out->string() << "\n";
  }
  return kExitOk;
}

int cmd_trace(const SimOptions& o) {
  SimOptions opts = o;
  const std::string out = opts.out;
  opts.out.clear();
  experiment::RunConfig cfg = build_config(opts);
  if (!o.count && o.config.empty()) {
    if (auto* spec = std::get_if<pktio::TrafficSpec>(&cfg.traffic)) spec->count = 4;
  }
  const auto image = experiment::load_ruleset(cfg);
  const auto packets = experiment::load_packets(cfg);
  const std::size_t cores = cfg.sweep.empty() ? cfg.engine.n_cores : cfg.sweep.front();
  EventTrace trace;
  experiment::simulate_point(cfg, image, packets, cores, &trace);
  write_text(out, trace.to_jsonl());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Many-core eBPF packet-filter simulator"};
  app.require_subcommand(1);

  std::string asm_in, asm_out;
  auto* asm_cmd = app.add_subcommand("asm", "Assemble a listing into flat bytecode plus a rule index sidecar");
  asm_cmd->add_option("input", asm_in, "Assembly listing")->required();
  asm_cmd->add_option("-o,--out", asm_out, "Bytecode output (default: input with .bin)");

  std::string dis_in, dis_index, dis_out;
  auto* dis_cmd = app.add_subcommand("disasm", "Disassemble flat bytecode into a canonical listing");
  dis_cmd->add_option("input", dis_in, "Flat bytecode")->required();
  dis_cmd->add_option("--index", dis_index, "Rule index sidecar (default: <input>.rules)");
  dis_cmd->add_option("-o,--out", dis_out, "Listing output (default: stdout)");

  std::string rules_types = "4", rules_out;
  auto* rules_cmd = app.add_subcommand("rules", "Print the built-in firewall ruleset as assembly");
  rules_cmd->add_option("--rules", rules_types, "Rule types, e.g. 4 or 1,3");
  rules_cmd->add_option("-o,--out", rules_out, "Output file (default: stdout)");

  SimOptions run_opts, cmp_opts, trace_opts;
  auto* run_cmd = app.add_subcommand("run", "Simulate the engine over a packet stream");
  add_sim_options(run_cmd, run_opts);
  auto* cmp_cmd = app.add_subcommand("compare", "Simulate and compare against the sequential baseline");
  add_sim_options(cmp_cmd, cmp_opts);
  auto* trace_cmd = app.add_subcommand("trace", "Dump the engine event trace as JSON lines");
  add_sim_options(trace_cmd, trace_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*asm_cmd) return cmd_asm(asm_in, asm_out);
    if (*dis_cmd) return cmd_disasm(dis_in, dis_index, dis_out);
    if (*rules_cmd) return cmd_rules(rules_types, rules_out);
    if (*run_cmd) return cmd_run(run_opts, false);
    if (*cmp_cmd) return cmd_run(cmp_opts, true);
    if (*trace_cmd) return cmd_trace(trace_opts);
  } catch (const Error& e) {
    std::cerr << "vebpf: " << to_string(e.code()) << ": " << e.what() << "\n";
    return is_input_error(e.code()) ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "vebpf: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
