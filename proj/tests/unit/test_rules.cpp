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

#include <random>

#include "../support/oracles.hpp"
#include "vebpf/engine.hpp"
#include "vebpf/error.hpp"
#include "vebpf/rules.hpp"

using namespace vebpf;

namespace {

pktio::HeaderSlice slice_of(const std::vector<std::uint8_t>& frame) {
  return pktio::slice_header(pktio::Packet{frame}, pktio::AutoSlice{}, 136);
}

std::vector<std::uint8_t> udp(std::uint32_t src, std::uint16_t dport) {
  return pktio::make_udp_frame(src, 0xc0a80001, 5555, dport, 64);
}

VerdictKind run_engine(const isa::ProgramImage& image, const pktio::HeaderSlice& hdr) {
  manycore::EngineConfig cfg;
  cfg.n_cores = 5;
  manycore::Engine engine(cfg);
  engine.upload_rules(image);
  return engine.process_packet(hdr).verdict.kind;
}

}  // namespace

TEST_SUITE("rules") {
  TEST_CASE("ruleset sizes") {
    CHECK(rules::build_ruleset(std::vector<int>{1}).rules.size() == 4);
    CHECK(rules::build_ruleset(std::vector<int>{2}).rules.size() == 9);
    CHECK(rules::build_ruleset(std::vector<int>{3}).rules.size() == 4);
    CHECK(rules::build_ruleset(std::vector<int>{4}).rules.size() == 17);
    CHECK(rules::build_ruleset(std::vector<int>{1, 3}).rules.size() == 8);
    CHECK(rules::build_ruleset(std::vector<int>{4, 1}).rules.size() == 17);
  }

  TEST_CASE("type parsing") {
    CHECK(rules::parse_rule_types("4") == std::vector<int>{4});
    CHECK(rules::parse_rule_types("type1,type3") == std::vector<int>{1, 3});
    CHECK_THROWS_AS(rules::parse_rule_types("5"), Error);
    CHECK_THROWS_AS(rules::parse_rule_types(""), Error);
    CHECK(rules::parse_ipv4("127.0.0.1") == 0x7f000001u);
    CHECK(rules::format_ipv4(0xc0a80001u) == "192.168.0.1");
    CHECK_THROWS_AS(rules::parse_ipv4("1.2.3"), Error);
    CHECK_THROWS_AS(rules::parse_ipv4("1.2.3.256"), Error);
  }

  TEST_CASE("every blocked value drops and benign traffic passes") {
    const auto image = rules::build_ruleset(std::vector<int>{4});
    const auto& table = rules::firewall_table();
    REQUIRE(table.size() == 17);
    for (std::size_t i = 0; i < table.size(); ++i) {
      std::vector<std::uint8_t> frame;
      if (const auto* ip = std::get_if<rules::BlockSrcIp>(&table[i].kind)) {
        frame = udp(ip->prefix.addr | (ip->prefix.length < 32 ? 1u : 0u), 4000);
      } else {
        frame = udp(0x0a000001, std::get<rules::BlockUdpDstPort>(table[i].kind).port);
      }
      const auto hdr = slice_of(frame);
      manycore::Engine engine({.n_cores = 1});
      engine.upload_rules(image);
      const auto r = engine.process_packet(hdr);
      INFO("rule " << table[i].name);
      CHECK(r.verdict.kind == VerdictKind::Drop);
      CHECK(r.verdict.rule_id == static_cast<std::uint32_t>(i));
    }
    CHECK(run_engine(image, slice_of(udp(0x0a000001, 4000))) == VerdictKind::DefaultPass);
    CHECK(run_engine(image, slice_of(pktio::make_tcp_frame(0x0a000001, 0xc0a80001, 1, 69, 64))) ==
          VerdictKind::DefaultPass);
  }

  TEST_CASE("prefix semantics") {
    const auto image = rules::build_ruleset(std::vector<int>{1});
    CHECK(run_engine(image, slice_of(udp(0x7f123456, 80))) == VerdictKind::Drop);
    CHECK(run_engine(image, slice_of(udp(0x80000000, 80))) == VerdictKind::DefaultPass);
    CHECK(run_engine(image, slice_of(udp(0xf0000000, 80))) == VerdictKind::Drop);
    CHECK(run_engine(image, slice_of(udp(0xefffffff, 80))) == VerdictKind::DefaultPass);
    CHECK(run_engine(image, slice_of(udp(0x00ffffff, 80))) == VerdictKind::Drop);
    CHECK(run_engine(image, slice_of(udp(0x01000000, 80))) == VerdictKind::DefaultPass);

    auto arp = udp(0x7f000001, 80);
    arp[12] = 0x08;
    arp[13] = 0x06;
    CHECK(run_engine(image, slice_of(arp)) == VerdictKind::DefaultPass);
    CHECK(run_engine(image, pktio::HeaderSlice{std::vector<std::uint8_t>(20, 0)}) == VerdictKind::DefaultPass);
  }

  TEST_CASE("baseline arithmetic and early exit") {
    const std::vector<std::uint64_t> lens(17, 16);
    const auto image = oracle::straight_rules(lens);
    const auto hdr = slice_of(udp(0x0a000001, 4000));
    auto r = rules::baseline_run(image, hdr, {1, 0});
    CHECK(r.verdict.kind == VerdictKind::DefaultPass);
    CHECK(r.ticks == 17 * 16);
    CHECK(r.instructions == 17 * 16);
    CHECK(r.rules_run == 17);
    r = rules::baseline_run(image, hdr, {4, 200});
    CHECK(r.ticks == 200 + 4 * 17 * 16);

    std::string text;
    for (int i = 0; i < 6; ++i) text += oracle::straight_rule("x" + std::to_string(i), 5, i == 3 ? 0 : 2);
    r = rules::baseline_run(isa::assemble(text), hdr, {1, 0});
    CHECK(r.verdict == Verdict{VerdictKind::Drop, 3u});
    CHECK(r.rules_run == 4);
    CHECK(r.ticks == 20);
  }

  TEST_CASE("agreement with the firewall oracle on random headers") {
    std::mt19937_64 rng(99);
    const std::vector<std::vector<int>> type_sets{{1}, {2}, {3}, {4}, {1, 3}};
    const std::vector<std::uint32_t> interesting_src{0xffffffff, 0x7f000001, 0xf0000001, 0x00000001, 0x0a000001};
    const std::vector<std::uint16_t> interesting_ports{111, 2000, 37, 135, 137, 138, 161, 162, 514,
                                                       69,  2049, 389, 4045, 53, 80};
    for (const auto& types : type_sets) {
      const auto image = rules::build_ruleset(types);
      manycore::Engine engine({.n_cores = 4});
      engine.upload_rules(image);
      for (int i = 0; i < 300; ++i) {
        const std::uint32_t src = rng() % 2 ? interesting_src[rng() % interesting_src.size()]
                                            : static_cast<std::uint32_t>(rng());
        const std::uint16_t port = rng() % 2 ? interesting_ports[rng() % interesting_ports.size()]
                                             : static_cast<std::uint16_t>(rng());
        auto frame = rng() % 4 ? udp(src, port) : pktio::make_tcp_frame(src, 0xc0a80001, 1, port, 80);
        if (rng() % 10 == 0) frame.resize(14 + rng() % 30);
        if (rng() % 10 == 0) frame[14] = static_cast<std::uint8_t>(0x45 + rng() % 3);
        const auto hdr = slice_of(frame);
        const auto expected = oracle::firewall_verdict(hdr.bytes, types);
        INFO("types " << types.size() << " iteration " << i);
        REQUIRE(engine.process_packet(hdr, i).verdict.kind == expected);
        REQUIRE(rules::baseline_run(image, hdr, {}).verdict.kind == expected);
      }
    }
  }
}
