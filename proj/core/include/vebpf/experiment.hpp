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

// Batch experiment harness: run configuration, the packet-stream driver that
// couples packet memory to the engine, and report generation.
//
// Config file (JSON, config_version 1). Every key is optional except
// config_version; unknown keys are rejected.
//
//   {
//     "config_version": 1,
//     "engine":   {"n_cores": 12, "prog_depth": 4096, "data_depth": 136,
//                  "clock_hz": 100000000, "tick_budget": 4096,
//                  "prog_word_cycles": 1, "data_word_cycles": 1},
//     "ruleset":  {"types": [4]}            or {"path": "rules/type4.asm"},
//     "traffic":  {"count": 2000, "sizes": [64], "rate_bps": 100000000,
//                  "mix": "benign", "malicious_fraction": 1.0, "seed": 1},
//     "pcap":     {"path": "in.pcap", "rate_bps": 100000000},
//     "slice":    "auto"                    or {"fixed": 64},
//     "sweep":    [1, 2, 4, 8, 12],
//     "baseline": {"enabled": false, "cost_factor": 4, "per_packet_overhead": 200},
//     "packet_memory": {"capacity": 1048576, "fifo_depth": 256},
//     "threads":  1,
//     "output":   {"path": "report.json", "format": "json"}
//   }
//
// "traffic" and "pcap" are mutually exclusive. Synthetic arrivals and pcap
// replay both use the engine clock.
//
// CSV report columns, in this order:
//   n_cores,pkt_id,size,header_len,arrival_cycle,start_cycle,verdict_cycle,
//   verdict,rule_id,latency_cycles,latency_us,rules_executed,
//   baseline_verdict,baseline_ticks,speedup

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vebpf/assembler.hpp"
#include "vebpf/engine.hpp"
#include "vebpf/pktio.hpp"
#include "vebpf/rules.hpp"
#include "vebpf/trace.hpp"

namespace vebpf::experiment {

inline constexpr int kConfigVersion = 1;

enum class ReportFormat { Json, Csv };
std::optional<ReportFormat> parse_report_format(std::string_view text);

struct RulesetSource {
  std::vector<int> types{4};
  /// Assembly (.asm) or flat bytecode with its sidecar; wins over `types`.
  std::optional<std::filesystem::path> path;
};

struct PcapSource {
  std::filesystem::path path;
  std::uint64_t rate_bps = 100'000'000;
};

using TrafficSource = std::variant<pktio::TrafficSpec, PcapSource>;

struct RunConfig {
  manycore::EngineConfig engine;
  RulesetSource ruleset;
  TrafficSource traffic = pktio::TrafficSpec{};
  pktio::SliceMode slice = pktio::AutoSlice{};
  /// n_cores values; empty runs engine.n_cores only.
  std::vector<std::size_t> sweep;
  bool baseline = false;
  rules::BaselineConfig baseline_cfg;
  std::uint64_t packet_memory_bytes = 1 << 20;
  std::size_t fifo_depth = pktio::PacketMemory::kDefaultFifoDepth;
  std::size_t threads = 1;
  std::optional<std::filesystem::path> out;
  ReportFormat format = ReportFormat::Json;
};

/// Throws InvalidConfig.
void validate(const RunConfig& cfg);
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& cfg);

std::vector<pktio::Packet> load_packets(const RunConfig& cfg);
isa::ProgramImage load_ruleset(const RunConfig& cfg);

struct BaselineColumns {
  Verdict verdict;
  std::uint64_t ticks = 0;
  double speedup = 0.0;
};

/// One processed packet. Cycles are relative to the start of traffic (the
/// rule upload happens before cycle 0).
struct PacketRow {
  std::uint64_t pkt_id = 0;
  std::uint32_t size = 0;
  std::uint32_t header_len = 0;
  std::uint64_t arrival_cycle = 0;
  /// Cycle the data loader started on this header.
  std::uint64_t start_cycle = 0;
  std::uint64_t verdict_cycle = 0;
  Verdict verdict;
  std::uint64_t latency_cycles = 0;
  double latency_us = 0.0;
  std::uint32_t rules_executed = 0;
  std::optional<BaselineColumns> baseline;
};

struct LatencyStats {
  std::uint64_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  /// Nearest-rank 99th percentile.
  std::uint64_t p99 = 0;
  std::uint64_t max = 0;
};

/// Mean, median and nearest-rank p99 of a sample.
LatencyStats latency_stats(std::vector<std::uint64_t> samples);

struct Aggregates {
  std::uint64_t packets_offered = 0;
  std::uint64_t packets_processed = 0;
  std::uint64_t ingress_drops = 0;
  std::map<std::string, std::uint64_t> verdicts;
  LatencyStats latency;
  std::map<std::uint32_t, LatencyStats> latency_by_size;
  std::uint64_t offered_bits = 0;
  std::uint64_t processed_bits = 0;
  /// Cycle after the last bit of the last packet arrives.
  std::uint64_t offered_window_cycles = 0;
  std::uint64_t last_verdict_cycle = 0;
  double offered_bps = 0.0;
  /// processed_bits over max(last verdict cycle + 1, offered window).
  double achieved_bps = 0.0;
  /// Every verdict registered before the next packet arrived.
  bool line_rate = false;
  double mean_baseline_ticks = 0.0;
  double mean_speedup = 0.0;
};

/// Recomputes aggregates from per-packet rows plus the offered stream.
Aggregates compute_aggregates(std::span<const PacketRow> rows, std::span<const pktio::Packet> offered,
                              std::uint64_t ingress_drops, std::uint64_t clock_hz, std::uint64_t rate_bps);

struct PointReport {
  std::size_t n_cores = 0;
  std::vector<PacketRow> rows;
  Aggregates aggregates;
  std::uint64_t upload_cycles = 0;
  std::uint64_t unknown_r0 = 0;
};

struct RunReport {
  RunConfig config;
  std::vector<PointReport> points;
};

/// Offered rate for the configured source (bits per second).
std::uint64_t offered_rate_bps(const RunConfig& cfg);

/// Drives one engine with `n_cores` over the stream. Headers load in arrival
/// order, one packet at a time. A packet is DMA'd into packet memory when it
/// arrives (or is dropped at ingress if memory or the descriptor FIFO is
/// full); its descriptor is freed as soon as its verdict registers.
/// With cfg.baseline set, each packet is also run through the sequential
/// baseline and VerdictMismatch is thrown on disagreement.
PointReport simulate_point(const RunConfig& cfg, const isa::ProgramImage& image,
                           std::span<const pktio::Packet> packets, std::size_t n_cores,
                           EventTrace* trace = nullptr);

/// Every sweep point, on up to cfg.threads worker threads.
RunReport run(const RunConfig& cfg);
RunReport run(const RunConfig& cfg, const isa::ProgramImage& image, std::span<const pktio::Packet> packets);

std::string report_json(const RunReport& report);
std::string report_csv(const RunReport& report);
std::string summary_table(const RunReport& report);
void write_report(const RunReport& report, const std::filesystem::path& path, ReportFormat format);

inline constexpr const char* kCsvHeader =
    "n_cores,pkt_id,size,header_len,arrival_cycle,start_cycle,verdict_cycle,verdict,rule_id,"
    "latency_cycles,latency_us,rules_executed,baseline_verdict,baseline_ticks,speedup";

}  // namespace vebpf::experiment
