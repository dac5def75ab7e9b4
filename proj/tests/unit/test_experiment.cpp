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

#include <doctest.h>

#include <sstream>

#include "../support/oracles.hpp"
#include "vebpf/error.hpp"
#include "vebpf/experiment.hpp"

using namespace vebpf;
using namespace vebpf::experiment;

namespace {

ErrorCode config_error(const std::string& json) {
  try {
    parse_config(json);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

RunConfig small_config(std::uint64_t count = 200) {
  RunConfig cfg;
  pktio::TrafficSpec spec;
  spec.count = count;
  spec.sizes = {64, 512, 1024};
  spec.mix = pktio::TrafficMix::Type4;
  spec.malicious_fraction = 0.3;
  cfg.traffic = spec;
  cfg.baseline = true;
  return cfg;
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("config parsing") {
    const auto cfg = parse_config(R"({"config_version": 1, "engine": {"n_cores": 4},
        "traffic": {"count": 10, "sizes": [64, 128], "mix": "type2", "seed": 3},
        "slice": {"fixed": 64}, "sweep": [1, 2], "baseline": {"enabled": true, "cost_factor": 2.0},
        "output": {"path": "x.csv", "format": "csv"}})");
    CHECK(cfg.engine.n_cores == 4);
    const auto& spec = std::get<pktio::TrafficSpec>(cfg.traffic);
    CHECK(spec.count == 10);
    CHECK(spec.mix == pktio::TrafficMix::Type2);
    CHECK(spec.seed == 3);
    CHECK(std::get<pktio::FixedSlice>(cfg.slice).length == 64);
    CHECK(cfg.sweep == std::vector<std::size_t>{1, 2});
    CHECK(cfg.baseline);
    CHECK(cfg.baseline_cfg.cost_factor == 2);
    CHECK(cfg.format == ReportFormat::Csv);

    const auto again = parse_config(config_to_json(cfg));
    CHECK(config_to_json(again) == config_to_json(cfg));

    CHECK(config_error("{") == ErrorCode::InvalidConfig);
    CHECK(config_error(R"({"engine": {}})") == ErrorCode::InvalidConfig);
    CHECK(config_error(R"({"config_version": 2})") == ErrorCode::InvalidConfig);
    CHECK(config_error(R"({"config_version": 1, "bogus": 1})") == ErrorCode::InvalidConfig);
    CHECK(config_error(R"({"config_version": 1, "engine": {"n_cores": 0}})") == ErrorCode::InvalidConfig);
    CHECK(config_error(R"({"config_version": 1, "engine": {"n_cores": 1.5}})") == ErrorCode::InvalidConfig);
    CHECK(config_error(R"({"config_version": 1, "traffic": {}, "pcap": {"path": "a"}})") ==
          ErrorCode::InvalidConfig);
    CHECK(config_error(R"({"config_version": 1, "traffic": {"mix": "nope"}})") == ErrorCode::InvalidConfig);
  }

  TEST_CASE("latency statistics") {
    const auto s = latency_stats({5, 1, 3, 2});
    CHECK(s.count == 4);
    CHECK(s.mean == doctest::Approx(2.75));
    CHECK(s.median == doctest::Approx(2.5));
    CHECK(s.max == 5);
    std::vector<std::uint64_t> hundred;
    for (std::uint64_t i = 1; i <= 100; ++i) hundred.push_back(i);
    CHECK(latency_stats(hundred).p99 == 99);
    CHECK(latency_stats({}).count == 0);
  }

  TEST_CASE("aggregates are recomputable from the rows") {
    const auto cfg = small_config();
    const auto report = run(cfg);
    REQUIRE(report.points.size() == 1);
    const auto& p = report.points[0];
    const auto packets = load_packets(cfg);
    const auto again = compute_aggregates(p.rows, packets, p.aggregates.ingress_drops, cfg.engine.clock_hz,
                                          offered_rate_bps(cfg));
    CHECK(again.latency.mean == p.aggregates.latency.mean);
    CHECK(again.achieved_bps == p.aggregates.achieved_bps);
    CHECK(again.verdicts == p.aggregates.verdicts);

    std::uint64_t drops = 0, sum = 0;
    for (const auto& r : p.rows) {
      drops += r.verdict.kind == VerdictKind::Drop;
      sum += r.latency_cycles;
      CHECK(r.latency_cycles == r.verdict_cycle - r.arrival_cycle + 1);
      CHECK(r.start_cycle >= r.arrival_cycle);
      CHECK(r.baseline);
    }
    CHECK(p.aggregates.verdicts.at("drop") == drops);
    CHECK(p.aggregates.latency.mean == doctest::Approx(double(sum) / p.rows.size()));
    CHECK(p.aggregates.packets_processed + p.aggregates.ingress_drops == 200);
  }

  TEST_CASE("firewall verdicts match the oracle end to end") {
    const auto cfg = small_config();
    const auto packets = load_packets(cfg);
    const auto report = run(cfg);
    for (const auto& r : report.points[0].rows) {
      const auto hdr = pktio::slice_header(packets[r.pkt_id], cfg.slice, cfg.engine.data_depth);
      CHECK(r.verdict.kind == oracle::firewall_verdict(hdr.bytes, std::vector<int>{4}));
    }
  }

  TEST_CASE("reports are byte-identical across runs and thread counts") {
    auto cfg = small_config(100);
    cfg.sweep = {1, 3, 12};
    const auto a = report_json(run(cfg));
    cfg.threads = 3;
    auto threaded = run(cfg);
    threaded.config.threads = 1;
    const auto b = report_json(threaded);
    CHECK(a == b);
    CHECK(report_csv(run(cfg)) == report_csv(run(cfg)));
  }

  TEST_CASE("more cores never raise mean latency") {
    auto cfg = small_config(150);
    cfg.sweep = {1, 2, 4, 8, 12, 17};
    const auto report = run(cfg);
    for (std::size_t i = 1; i < report.points.size(); ++i) {
      CHECK(report.points[i].aggregates.latency.mean <= report.points[i - 1].aggregates.latency.mean);
    }
  }

  TEST_CASE("baseline disagreement raises VerdictMismatch") {
    auto cfg = small_config(5);
    const auto image = isa::assemble(oracle::straight_rule("slow_store", 40, 1) + oracle::straight_rule("fast_drop", 2, 0));
    const auto packets = load_packets(cfg);
    try {
      run(cfg, image, packets);
      FAIL("expected VerdictMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::VerdictMismatch);
      CHECK(std::string(e.what()).find("header (") != std::string::npos);
    }
    cfg.baseline = false;
    CHECK(run(cfg, image, packets).points[0].rows.size() == 5);
  }

  TEST_CASE("line rate at 100 Mb/s and overload at 10 Gb/s") {
    RunConfig cfg;
    pktio::TrafficSpec spec;
    spec.count = 300;
    spec.sizes = {64};
    spec.mix = pktio::TrafficMix::Benign;
    cfg.traffic = spec;
    cfg.engine.n_cores = 12;
    auto a = run(cfg).points[0].aggregates;
    CHECK(a.line_rate);
    CHECK(a.ingress_drops == 0);
    CHECK(a.offered_bps == doctest::Approx(100e6));
    CHECK(a.achieved_bps == doctest::Approx(100e6));

    spec.rate_bps = 10'000'000'000;
    cfg.traffic = spec;
    cfg.engine.n_cores = 1;
    cfg.fifo_depth = 8;
    a = run(cfg).points[0].aggregates;
    CHECK_FALSE(a.line_rate);
    CHECK(a.ingress_drops > 0);
    CHECK(a.achieved_bps < a.offered_bps);
  }

  TEST_CASE("report formats") {
    auto cfg = small_config(10);
    cfg.sweep = {2, 4};
    const auto report = run(cfg);
    const auto csv = report_csv(report);
    CHECK(csv.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 10);
    const auto json = report_json(report);
    CHECK(json.find("\"points\"") != std::string::npos);
    CHECK_FALSE(summary_table(report).empty());
    CHECK(parse_report_format("csv") == ReportFormat::Csv);
    CHECK_FALSE(parse_report_format("xml"));
  }
}
