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

#include "vebpf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "vebpf/error.hpp"

namespace vebpf::experiment {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void bad_config(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) bad_config(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      bad_config("unknown key '" + key + "' in " + where);
    }
  }
}

std::uint64_t get_u64(const json& v, const std::string& name) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() < 0) bad_config(name + " must not be negative");
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d < 0 || d != std::floor(d) || d > 1.8e19) bad_config(name + " must be a non-negative integer");
    return static_cast<std::uint64_t>(d);
  }
  bad_config(name + " must be a number");
}

template <class T>
void read_u64(const json& obj, const char* key, T& out, const std::string& where) {
  if (obj.contains(key)) out = static_cast<T>(get_u64(obj.at(key), where + "." + key));
}

std::string verdict_text(const Verdict& v) { return std::string(to_string(v.kind)); }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

json stats_json(const LatencyStats& s) {
  return json{{"count", s.count}, {"mean", s.mean}, {"median", s.median}, {"p99", s.p99}, {"max", s.max}};
}

json config_json(const RunConfig& cfg) {
  json j;
  j["config_version"] = kConfigVersion;
  const auto& e = cfg.engine;
  j["engine"] = {{"n_cores", e.n_cores},
                 {"prog_depth", e.prog_depth},
                 {"data_depth", e.data_depth},
                 {"clock_hz", e.clock_hz},
                 {"tick_budget", e.tick_budget},
                 {"prog_word_cycles", e.prog_word_cycles},
                 {"data_word_cycles", e.data_word_cycles}};
  if (cfg.ruleset.path) {
    j["ruleset"] = {{"path", cfg.ruleset.path->generic_string()}};
  } else {
    j["ruleset"] = {{"types", cfg.ruleset.types}};
  }
  if (const auto* spec = std::get_if<pktio::TrafficSpec>(&cfg.traffic)) {
    j["traffic"] = {{"count", spec->count},
                    {"sizes", spec->sizes},
                    {"rate_bps", spec->rate_bps},
                    {"mix", std::string(pktio::to_string(spec->mix))},
                    {"malicious_fraction", spec->malicious_fraction},
                    {"seed", spec->seed}};
  } else {
    const auto& pcap = std::get<PcapSource>(cfg.traffic);
    j["pcap"] = {{"path", pcap.path.generic_string()}, {"rate_bps", pcap.rate_bps}};
  }
  if (const auto* f = std::get_if<pktio::FixedSlice>(&cfg.slice)) {
    j["slice"] = {{"fixed", f->length}};
  } else {
    j["slice"] = "auto";
  }
  j["sweep"] = cfg.sweep;
  j["baseline"] = {{"enabled", cfg.baseline},
                   {"cost_factor", cfg.baseline_cfg.cost_factor},
                   {"per_packet_overhead", cfg.baseline_cfg.per_packet_overhead}};
  j["packet_memory"] = {{"capacity", cfg.packet_memory_bytes}, {"fifo_depth", cfg.fifo_depth}};
  j["threads"] = cfg.threads;
  json out = {{"format", cfg.format == ReportFormat::Json ? "json" : "csv"}};
  if (cfg.out) out["path"] = cfg.out->generic_string();
  j["output"] = out;
  return j;
}

std::string hex_dump(std::span<const std::uint8_t> bytes) {
  std::string s;
  char buf[4];
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%02x", bytes[i]);
    if (i) s += (i % 16 == 0) ? '\n' : ' ';
    s += buf;
  }
  return s;
}

std::string describe(const Verdict& v) {
  std::string s(to_string(v.kind));
  if (v.rule_id) s += "(rule " + std::to_string(*v.rule_id) + ")";
  return s;
}

}  // namespace

std::optional<ReportFormat> parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::Json;
  if (text == "csv") return ReportFormat::Csv;
  return std::nullopt;
}

void validate(const RunConfig& cfg) {
  manycore::validate(cfg.engine);
  for (auto n : cfg.sweep) {
    if (n == 0) bad_config("sweep values must be at least 1");
  }
  if (cfg.threads == 0) bad_config("threads must be at least 1");
  if (cfg.packet_memory_bytes == 0) bad_config("packet_memory.capacity must be nonzero");
  if (cfg.fifo_depth == 0) bad_config("packet_memory.fifo_depth must be nonzero");
  if (cfg.baseline_cfg.cost_factor == 0) bad_config("baseline.cost_factor must be at least 1");
  if (!cfg.ruleset.path) {
    if (cfg.ruleset.types.empty()) bad_config("ruleset.types must not be empty");
    for (int t : cfg.ruleset.types) {
      if (t < 1 || t > 4) bad_config("rule type must be 1-4, got " + std::to_string(t));
    }
  }
  if (const auto* spec = std::get_if<pktio::TrafficSpec>(&cfg.traffic)) {
    if (spec->sizes.empty()) bad_config("traffic.sizes must not be empty");
    for (auto s : spec->sizes) {
      if (s < pktio::kMinSyntheticSize || s > pktio::kMaxSyntheticSize) {
        bad_config("traffic size " + std::to_string(s) + " outside [42, 9018]");
      }
    }
    if (spec->rate_bps == 0) bad_config("traffic.rate_bps must be nonzero");
    if (!(spec->malicious_fraction >= 0.0 && spec->malicious_fraction <= 1.0)) {
      bad_config("traffic.malicious_fraction must be in [0, 1]");
    }
  } else if (std::get<PcapSource>(cfg.traffic).rate_bps == 0) {
    bad_config("pcap.rate_bps must be nonzero");
  }
  if (const auto* f = std::get_if<pktio::FixedSlice>(&cfg.slice); f && f->length == 0) {
    bad_config("slice.fixed must be at least 1");
  }
}

RunConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    bad_config(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j,
             {"config_version", "engine", "ruleset", "traffic", "pcap", "slice", "sweep", "baseline",
              "packet_memory", "threads", "output"},
             "config");
  if (!j.contains("config_version")) bad_config("config_version is required");
  if (get_u64(j.at("config_version"), "config_version") != kConfigVersion) {
    bad_config("unsupported config_version (expected " + std::to_string(kConfigVersion) + ")");
  }

  RunConfig cfg;
  try {
    if (j.contains("engine")) {
      const json& e = j.at("engine");
      check_keys(e,
                 {"n_cores", "prog_depth", "data_depth", "clock_hz", "tick_budget", "prog_word_cycles",
                  "data_word_cycles"},
                 "engine");
      read_u64(e, "n_cores", cfg.engine.n_cores, "engine");
      read_u64(e, "prog_depth", cfg.engine.prog_depth, "engine");
      read_u64(e, "data_depth", cfg.engine.data_depth, "engine");
      read_u64(e, "clock_hz", cfg.engine.clock_hz, "engine");
      read_u64(e, "tick_budget", cfg.engine.tick_budget, "engine");
      read_u64(e, "prog_word_cycles", cfg.engine.prog_word_cycles, "engine");
      read_u64(e, "data_word_cycles", cfg.engine.data_word_cycles, "engine");
    }
    if (j.contains("ruleset")) {
      const json& r = j.at("ruleset");
      check_keys(r, {"types", "path"}, "ruleset");
      if (r.contains("types") && r.contains("path")) bad_config("ruleset takes either types or path");
      if (r.contains("path")) cfg.ruleset.path = r.at("path").get<std::string>();
      if (r.contains("types")) {
        cfg.ruleset.types.clear();
        for (const auto& t : r.at("types")) {
          if (t.is_string()) {
            for (int v : rules::parse_rule_types(t.get<std::string>())) cfg.ruleset.types.push_back(v);
          } else {
            cfg.ruleset.types.push_back(static_cast<int>(get_u64(t, "ruleset.types")));
          }
        }
      }
    }
    if (j.contains("traffic") && j.contains("pcap")) bad_config("traffic and pcap are mutually exclusive");
    if (j.contains("traffic")) {
      const json& t = j.at("traffic");
      check_keys(t, {"count", "sizes", "rate_bps", "mix", "malicious_fraction", "seed"}, "traffic");
      pktio::TrafficSpec spec;
      read_u64(t, "count", spec.count, "traffic");
      read_u64(t, "rate_bps", spec.rate_bps, "traffic");
      read_u64(t, "seed", spec.seed, "traffic");
      if (t.contains("sizes")) {
        spec.sizes.clear();
        for (const auto& s : t.at("sizes")) spec.sizes.push_back(static_cast<std::uint32_t>(get_u64(s, "traffic.sizes")));
      }
      if (t.contains("mix")) {
        auto mix = pktio::parse_traffic_mix(t.at("mix").get<std::string>());
        if (!mix) bad_config("traffic.mix must be benign or type1..type4");
        spec.mix = *mix;
      }
      if (t.contains("malicious_fraction")) spec.malicious_fraction = t.at("malicious_fraction").get<double>();
      cfg.traffic = spec;
    }
    if (j.contains("pcap")) {
      const json& p = j.at("pcap");
      check_keys(p, {"path", "rate_bps"}, "pcap");
      if (!p.contains("path")) bad_config("pcap.path is required");
      PcapSource src;
      src.path = p.at("path").get<std::string>();
      read_u64(p, "rate_bps", src.rate_bps, "pcap");
      cfg.traffic = src;
    }
    if (j.contains("slice")) {
      const json& s = j.at("slice");
      if (s.is_string()) {
        if (s.get<std::string>() != "auto") bad_config("slice must be \"auto\" or {\"fixed\": n}");
        cfg.slice = pktio::AutoSlice{};
      } else {
        check_keys(s, {"fixed"}, "slice");
        if (!s.contains("fixed")) bad_config("slice must be \"auto\" or {\"fixed\": n}");
        cfg.slice = pktio::FixedSlice{static_cast<std::size_t>(get_u64(s.at("fixed"), "slice.fixed"))};
      }
    }
    if (j.contains("sweep")) {
      for (const auto& n : j.at("sweep")) cfg.sweep.push_back(static_cast<std::size_t>(get_u64(n, "sweep")));
    }
    if (j.contains("baseline")) {
      const json& b = j.at("baseline");
      check_keys(b, {"enabled", "cost_factor", "per_packet_overhead"}, "baseline");
      if (b.contains("enabled")) cfg.baseline = b.at("enabled").get<bool>();
      read_u64(b, "cost_factor", cfg.baseline_cfg.cost_factor, "baseline");
      read_u64(b, "per_packet_overhead", cfg.baseline_cfg.per_packet_overhead, "baseline");
    }
    if (j.contains("packet_memory")) {
      const json& m = j.at("packet_memory");
      check_keys(m, {"capacity", "fifo_depth"}, "packet_memory");
      read_u64(m, "capacity", cfg.packet_memory_bytes, "packet_memory");
      read_u64(m, "fifo_depth", cfg.fifo_depth, "packet_memory");
    }
    if (j.contains("threads")) cfg.threads = static_cast<std::size_t>(get_u64(j.at("threads"), "threads"));
    if (j.contains("output")) {
      const json& o = j.at("output");
      check_keys(o, {"path", "format"}, "output");
      if (o.contains("path")) cfg.out = o.at("path").get<std::string>();
      if (o.contains("format")) {
        auto f = parse_report_format(o.at("format").get<std::string>());
        if (!f) bad_config("output.format must be json or csv");
        cfg.format = *f;
      }
    }
  } catch (const json::exception& e) {
    bad_config(std::string("config has a value of the wrong type: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const RunConfig& cfg) { return config_json(cfg).dump(2); }

std::vector<pktio::Packet> load_packets(const RunConfig& cfg) {
  if (const auto* spec = std::get_if<pktio::TrafficSpec>(&cfg.traffic)) {
    pktio::TrafficSpec s = *spec;
    s.clock_hz = cfg.engine.clock_hz;
    return pktio::gen_synthetic(s);
  }
  const auto& src = std::get<PcapSource>(cfg.traffic);
  auto packets = pktio::read_pcap(src.path);
  pktio::assign_arrivals(packets, src.rate_bps, cfg.engine.clock_hz);
  return packets;
}

isa::ProgramImage load_ruleset(const RunConfig& cfg) {
  if (!cfg.ruleset.path) return rules::build_ruleset(cfg.ruleset.types);
  const auto& path = *cfg.ruleset.path;
  const auto ext = path.extension().string();
  if (ext == ".asm" || ext == ".s") {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return isa::assemble(ss.str());
  }
  return isa::load_flat(path);
}

std::uint64_t offered_rate_bps(const RunConfig& cfg) {
  if (const auto* spec = std::get_if<pktio::TrafficSpec>(&cfg.traffic)) return spec->rate_bps;
  return std::get<PcapSource>(cfg.traffic).rate_bps;
}

LatencyStats latency_stats(std::vector<std::uint64_t> samples) {
  LatencyStats s;
  s.count = samples.size();
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  long double sum = 0;
  for (auto v : samples) sum += v;
  s.mean = static_cast<double>(sum / samples.size());
  const std::size_t n = samples.size();
  s.median = n % 2 ? static_cast<double>(samples[n / 2])
                   : (static_cast<double>(samples[n / 2 - 1]) + static_cast<double>(samples[n / 2])) / 2.0;
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(n)));
  s.p99 = samples[std::max<std::size_t>(rank, 1) - 1];
  s.max = samples.back();
  return s;
}

Aggregates compute_aggregates(std::span<const PacketRow> rows, std::span<const pktio::Packet> offered,
                              std::uint64_t ingress_drops, std::uint64_t clock_hz, std::uint64_t rate_bps) {
  Aggregates a;
  a.packets_offered = offered.size();
  a.packets_processed = rows.size();
  a.ingress_drops = ingress_drops;
  for (auto k : {VerdictKind::Drop, VerdictKind::Store, VerdictKind::Error, VerdictKind::DefaultPass}) {
    a.verdicts[std::string(to_string(k))] = 0;
  }

  std::vector<std::uint64_t> all;
  std::map<std::uint32_t, std::vector<std::uint64_t>> by_size;
  long double base_ticks = 0, speedup = 0;
  std::size_t base_n = 0;
  for (const auto& r : rows) {
    ++a.verdicts[verdict_text(r.verdict)];
    all.push_back(r.latency_cycles);
    by_size[r.size].push_back(r.latency_cycles);
    a.processed_bits += 8ull * r.size;
    a.last_verdict_cycle = std::max(a.last_verdict_cycle, r.verdict_cycle);
    if (r.baseline) {
      base_ticks += r.baseline->ticks;
      speedup += r.baseline->speedup;
      ++base_n;
    }
  }
  a.latency = latency_stats(std::move(all));
  for (auto& [size, v] : by_size) a.latency_by_size[size] = latency_stats(std::move(v));
  if (base_n) {
    a.mean_baseline_ticks = static_cast<double>(base_ticks / base_n);
    a.mean_speedup = static_cast<double>(speedup / base_n);
  }

  for (const auto& p : offered) a.offered_bits += 8ull * p.bytes.size();
  if (!offered.empty()) {
    const auto& last = offered.back();
    a.offered_window_cycles =
        last.arrival_tick +
        pktio::inter_arrival_cycles(static_cast<std::uint32_t>(last.bytes.size()), rate_bps, clock_hz);
  }
  const auto hz = static_cast<long double>(clock_hz);
  if (a.offered_window_cycles) {
    a.offered_bps = static_cast<double>(a.offered_bits * hz / a.offered_window_cycles);
  }
  const std::uint64_t span_cycles =
      std::max<std::uint64_t>(rows.empty() ? 0 : a.last_verdict_cycle + 1, a.offered_window_cycles);
  if (span_cycles) a.achieved_bps = static_cast<double>(a.processed_bits * hz / span_cycles);

  a.line_rate = ingress_drops == 0 && rows.size() == offered.size();
  for (std::size_t i = 0; a.line_rate && i < rows.size(); ++i) {
    const std::uint64_t deadline = i + 1 < rows.size() ? rows[i + 1].arrival_cycle : a.offered_window_cycles;
    if (rows[i].verdict_cycle >= deadline) a.line_rate = false;
  }
  return a;
}

PointReport simulate_point(const RunConfig& cfg, const isa::ProgramImage& image,
                           std::span<const pktio::Packet> packets, std::size_t n_cores, EventTrace* trace) {
  manycore::EngineConfig ecfg = cfg.engine;
  ecfg.n_cores = n_cores;
  manycore::Engine engine(ecfg);
  if (trace) engine.trace().enable();
  const std::uint64_t t0 = engine.upload_rules(image);
  const vcore::CoreConfig core_cfg{ecfg.prog_depth, ecfg.data_depth, ecfg.tick_budget};

  PointReport report;
  report.n_cores = n_cores;
  report.upload_cycles = t0;

  pktio::PacketMemory mem(cfg.packet_memory_bytes, 0, cfg.fifo_depth);
  std::deque<std::size_t> queue;
  std::size_t next = 0;
  std::uint64_t drops = 0;
  auto ingest_until = [&](std::uint64_t cycle) {
    while (next < packets.size() && packets[next].arrival_tick + t0 <= cycle) {
      try {
        mem.dma_write(packets[next]);
        queue.push_back(next);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::OutOfPacketMemory && e.code() != ErrorCode::DescriptorFifoFull) throw;
        ++drops;
      }
      ++next;
    }
  };

  for (;;) {
    if (queue.empty()) {
      if (next == packets.size()) break;
      engine.advance_to(std::max(engine.now(), packets[next].arrival_tick + t0));
      ingest_until(engine.now());
      continue;
    }
    const pktio::Packet& pkt = packets[queue.front()];
    const pktio::HeaderSlice slice = pktio::slice_header(pkt, cfg.slice, ecfg.data_depth);
    const std::uint64_t available = pkt.arrival_tick + t0;
    const std::uint64_t start = std::max(engine.now(), available);
    const manycore::PacketResult res = engine.process_packet(slice, pkt.id, available);

    ingest_until(res.verdict_cycle);
    mem.set_verdict(pkt.id, res.verdict, res.verdict_cycle - t0);
    mem.free_descriptor();
    queue.pop_front();

    PacketRow row;
    row.pkt_id = pkt.id;
    row.size = static_cast<std::uint32_t>(pkt.bytes.size());
    row.header_len = static_cast<std::uint32_t>(slice.length());
    row.arrival_cycle = pkt.arrival_tick;
    row.start_cycle = start - t0;
    row.verdict_cycle = res.verdict_cycle - t0;
    row.verdict = res.verdict;
    row.latency_cycles = res.latency_cycles;
    row.latency_us = static_cast<double>(res.latency_cycles) * 1e6 / static_cast<double>(ecfg.clock_hz);
    row.rules_executed = res.rules_executed;
    if (cfg.baseline) {
      const rules::BaselineResult base = rules::baseline_run(image, slice, cfg.baseline_cfg, core_cfg);
      if (base.verdict.kind != res.verdict.kind) {
        throw Error(ErrorCode::VerdictMismatch,
                    "verdict mismatch on packet " + std::to_string(pkt.id) + " with " + std::to_string(n_cores) +
                        " cores: many-core " + describe(res.verdict) + ", baseline " + describe(base.verdict) +
                        "\nheader (" + std::to_string(slice.length()) + " bytes):\n" + hex_dump(slice.bytes));
      }
      row.baseline = BaselineColumns{base.verdict, base.ticks,
                                     static_cast<double>(base.ticks) / static_cast<double>(res.latency_cycles)};
    }
    report.rows.push_back(std::move(row));
  }

  report.unknown_r0 = engine.stats().unknown_r0;
  report.aggregates = compute_aggregates(report.rows, packets, drops, ecfg.clock_hz, offered_rate_bps(cfg));
  if (trace) *trace = engine.trace();
  return report;
}

RunReport run(const RunConfig& cfg, const isa::ProgramImage& image, std::span<const pktio::Packet> packets) {
  validate(cfg);
  RunReport report;
  report.config = cfg;
  std::vector<std::size_t> points = cfg.sweep.empty() ? std::vector<std::size_t>{cfg.engine.n_cores} : cfg.sweep;
  report.points.resize(points.size());

  const std::size_t workers = std::min(cfg.threads, points.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < points.size(); ++i) report.points[i] = simulate_point(cfg, image, packets, points[i]);
    return report;
  }
  std::atomic<std::size_t> cursor{0};
  std::vector<std::exception_ptr> errors(points.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = cursor++; i < points.size(); i = cursor++) {
        try {
          report.points[i] = simulate_point(cfg, image, packets, points[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return report;
}

RunReport run(const RunConfig& cfg) {
  validate(cfg);
  const auto image = load_ruleset(cfg);
  const auto packets = load_packets(cfg);
  return run(cfg, image, packets);
}

std::string report_json(const RunReport& report) {
  json j;
  j["config_version"] = kConfigVersion;
  j["config"] = config_json(report.config);
  json points = json::array();
  for (const auto& p : report.points) {
    const Aggregates& a = p.aggregates;
    json agg;
    agg["packets_offered"] = a.packets_offered;
    agg["packets_processed"] = a.packets_processed;
    agg["ingress_drops"] = a.ingress_drops;
    agg["verdicts"] = a.verdicts;
    agg["latency_cycles"] = stats_json(a.latency);
    json by_size = json::object();
    for (const auto& [size, s] : a.latency_by_size) by_size[std::to_string(size)] = stats_json(s);
    agg["latency_cycles_by_size"] = by_size;
    agg["offered_bits"] = a.offered_bits;
    agg["processed_bits"] = a.processed_bits;
    agg["offered_window_cycles"] = a.offered_window_cycles;
    agg["last_verdict_cycle"] = a.last_verdict_cycle;
    agg["offered_bps"] = a.offered_bps;
    agg["achieved_bps"] = a.achieved_bps;
    agg["line_rate"] = a.line_rate;
    if (report.config.baseline) {
      agg["mean_baseline_ticks"] = a.mean_baseline_ticks;
      agg["mean_speedup"] = a.mean_speedup;
    }

    json rows = json::array();
    for (const auto& r : p.rows) {
      json row;
      row["pkt_id"] = r.pkt_id;
      row["size"] = r.size;
      row["header_len"] = r.header_len;
      row["arrival_cycle"] = r.arrival_cycle;
      row["start_cycle"] = r.start_cycle;
      row["verdict_cycle"] = r.verdict_cycle;
      row["verdict"] = verdict_text(r.verdict);
      row["rule_id"] = r.verdict.rule_id ? json(*r.verdict.rule_id) : json(nullptr);
      row["latency_cycles"] = r.latency_cycles;
      row["latency_us"] = r.latency_us;
      row["rules_executed"] = r.rules_executed;
      if (r.baseline) {
        row["baseline_verdict"] = verdict_text(r.baseline->verdict);
        row["baseline_ticks"] = r.baseline->ticks;
        row["speedup"] = r.baseline->speedup;
      }
      rows.push_back(std::move(row));
    }
    points.push_back({{"n_cores", p.n_cores},
                      {"upload_cycles", p.upload_cycles},
                      {"unknown_r0", p.unknown_r0},
                      {"aggregates", std::move(agg)},
                      {"packets", std::move(rows)}});
  }
  j["points"] = std::move(points);
  return j.dump(2) + "\n";
}

std::string report_csv(const RunReport& report) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& p : report.points) {
    for (const auto& r : p.rows) {
      out += std::to_string(p.n_cores) + ',' + std::to_string(r.pkt_id) + ',' + std::to_string(r.size) + ',' +
             std::to_string(r.header_len) + ',' + std::to_string(r.arrival_cycle) + ',' +
             std::to_string(r.start_cycle) + ',' + std::to_string(r.verdict_cycle) + ',' + verdict_text(r.verdict) +
             ',' + (r.verdict.rule_id ? std::to_string(*r.verdict.rule_id) : std::string()) + ',' +
             std::to_string(r.latency_cycles) + ',' + fixed(r.latency_us, 3) + ',' +
             std::to_string(r.rules_executed) + ',';
      if (r.baseline) {
        out += verdict_text(r.baseline->verdict) + ',' + std::to_string(r.baseline->ticks) + ',' +
               fixed(r.baseline->speedup, 4);
      } else {
        out += ",,";
      }
      out += '\n';
    }
  }
  return out;
}

std::string summary_table(const RunReport& report) {
  const bool base = report.config.baseline;
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%6s %8s %6s %9s %8s %6s %6s %6s %6s %6s %10s %10s %5s", "cores", "packets",
                "ingr", "mean_lat", "median", "p99", "drop", "store", "error", "pass", "offer_Mbps", "achv_Mbps",
                "line");
  out += line;
  if (base) out += "  base_ticks  speedup";
  out += '\n';
  for (const auto& p : report.points) {
    const Aggregates& a = p.aggregates;
    std::snprintf(line, sizeof line, "%6zu %8llu %6llu %9.2f %8.1f %6llu %6llu %6llu %6llu %6llu %10.3f %10.3f %5s",
                  p.n_cores, static_cast<unsigned long long>(a.packets_processed),
                  static_cast<unsigned long long>(a.ingress_drops), a.latency.mean, a.latency.median,
                  static_cast<unsigned long long>(a.latency.p99),
                  static_cast<unsigned long long>(a.verdicts.at("drop")),
                  static_cast<unsigned long long>(a.verdicts.at("store")),
                  static_cast<unsigned long long>(a.verdicts.at("error")),
                  static_cast<unsigned long long>(a.verdicts.at("default_pass")), a.offered_bps / 1e6,
                  a.achieved_bps / 1e6, a.line_rate ? "yes" : "no");
    out += line;
    if (base) {
      std::snprintf(line, sizeof line, "  %10.2f  %7.3f", a.mean_baseline_ticks, a.mean_speedup);
      out += line;
    }
    out += '\n';
  }
  return out;
}

void write_report(const RunReport& report, const std::filesystem::path& path, ReportFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << (format == ReportFormat::Json ? report_json(report) : report_csv(report));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

}  // namespace vebpf::experiment
