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

#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include "vebpf/error.hpp"
#include "vebpf/pktio.hpp"

using namespace vebpf;
using namespace vebpf::pktio;

namespace {

Packet pkt_of(std::vector<std::uint8_t> bytes, std::uint64_t id = 0) {
  Packet p;
  p.bytes = std::move(bytes);
  p.id = id;
  return p;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("vebpf_pktio_" + name);
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_SUITE("pktio") {
  TEST_CASE("header slicer") {
    const auto udp = make_udp_frame(0x0a000001, 0xc0a80001, 1234, 53, 64);
    CHECK(parsed_header_length(udp) == 42);
    const auto tcp = make_tcp_frame(0x0a000001, 0xc0a80001, 1234, 80, 128);
    CHECK(parsed_header_length(tcp) == 54);

    auto tcp_opts = tcp;
    tcp_opts[46] = 15 << 4;  // 60-byte TCP header
    CHECK(parsed_header_length(tcp_opts) == 14 + 20 + 60);

    auto ip_opts = make_udp_frame(0x0a000001, 0xc0a80001, 1234, 53, 128);
    ip_opts[14] = 0x4f;  // IHL 15
    CHECK(parsed_header_length(ip_opts) == 14 + 60 + 8);

    std::vector<std::uint8_t> arp(60, 0);
    arp[12] = 0x08;
    arp[13] = 0x06;
    CHECK(parsed_header_length(arp) == 14);

    std::vector<std::uint8_t> v6(100, 0);
    v6[12] = 0x86;
    v6[13] = 0xdd;
    v6[14 + 6] = kProtoUdp;
    CHECK(parsed_header_length(v6) == 62);

    CHECK(parsed_header_length(std::vector<std::uint8_t>(10, 0)) == 10);
    std::vector<std::uint8_t> short_ip(udp.begin(), udp.begin() + 30);
    CHECK(parsed_header_length(short_ip) == 30);

    CHECK(slice_header(pkt_of(udp), AutoSlice{}, 136).length() == 42);
    CHECK(slice_header(pkt_of(udp), FixedSlice{16}, 136).length() == 16);
    CHECK(slice_header(pkt_of(udp), FixedSlice{100}, 136).length() == 64);
    CHECK(slice_header(pkt_of(tcp_opts), AutoSlice{}, 64).length() == 64);
  }

  TEST_CASE("synthetic frames are well formed") {
    const auto f = make_udp_frame(0x01020304, 0xc0a80001, 4000, 69, 64);
    CHECK(f.size() == 64);
    CHECK(f[23] == kProtoUdp);
    CHECK(f[26] == 1);
    CHECK(f[29] == 4);
    CHECK((f[36] << 8 | f[37]) == 69);
    std::uint32_t sum = 0;
    for (int i = 14; i < 34; i += 2) sum += static_cast<std::uint32_t>(f[i] << 8 | f[i + 1]);
    while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
    CHECK(sum == 0xffff);
    CHECK_THROWS_AS(make_udp_frame(1, 2, 3, 4, 41), Error);
  }

  TEST_CASE("inter-arrival at 100 Mb/s and 100 MHz") {
    CHECK(inter_arrival_cycles(64, 100'000'000, 100'000'000) == 512);
    CHECK(inter_arrival_cycles(512, 100'000'000, 100'000'000) == 4096);
    CHECK(inter_arrival_cycles(1024, 100'000'000, 100'000'000) == 8192);
    CHECK(inter_arrival_cycles(64, 1'000'000'000, 100'000'000) == 52);  // rounded up
  }

  TEST_CASE("synthetic traffic is deterministic per seed") {
    TrafficSpec spec;
    spec.count = 200;
    spec.sizes = {64, 512};
    spec.mix = TrafficMix::Type4;
    spec.malicious_fraction = 0.5;
    const auto a = gen_synthetic(spec);
    const auto b = gen_synthetic(spec);
    REQUIRE(a.size() == 200);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].bytes == b[i].bytes);
      CHECK(a[i].arrival_tick == b[i].arrival_tick);
    }
    CHECK(a[1].arrival_tick == inter_arrival_cycles(static_cast<std::uint32_t>(a[0].bytes.size()), spec.rate_bps,
                                                    spec.clock_hz));
    spec.seed = 2;
    CHECK(gen_synthetic(spec)[0].bytes != a[0].bytes);
    spec.sizes = {20};
    CHECK_THROWS_AS(gen_synthetic(spec), Error);
  }

  TEST_CASE("packet memory basics") {
    PacketMemory mem(256, 0x1000, 4);
    const auto r = mem.dma_write(pkt_of(std::vector<std::uint8_t>(42, 7), 1));
    CHECK(r.descriptor.base_addr == 0x1000);
    CHECK(r.bus_cycles == 6);
    CHECK(mem.free_bytes() == 256 - 48);
    CHECK(mem.bytes(0x1000, 42)[41] == 7);
    CHECK(mem.dma_write(pkt_of(std::vector<std::uint8_t>(64, 1), 2)).descriptor.base_addr == 0x1030);

    CHECK_FALSE(mem.read_descriptor_with_result());
    CHECK(mem.set_verdict(1, Verdict{VerdictKind::Drop, 0}, 99));
    CHECK_FALSE(mem.set_verdict(1, Verdict{VerdictKind::Drop, 0}, 100));
    CHECK_FALSE(mem.set_verdict(77, Verdict{}, 1));
    CsrFile csr;
    const auto readout = read_descriptor_with_result(csr, mem);
    REQUIRE(readout);
    CHECK(readout->pkt_id == 1);
    CHECK(readout->verdict_tick == 99u);

    CHECK(mem.free_descriptor().pkt_id == 1);
    CHECK(mem.free_descriptor().pkt_id == 2);
    CHECK(mem.free_bytes() == 256);
    CHECK_THROWS_AS(mem.free_descriptor(), Error);
  }

  TEST_CASE("packet memory exhaustion, FIFO depth and wraparound") {
    PacketMemory mem(128, 0, 3);
    mem.dma_write(pkt_of(std::vector<std::uint8_t>(60), 1));  // 64
    mem.dma_write(pkt_of(std::vector<std::uint8_t>(40), 2));  // 40
    try {
      mem.dma_write(pkt_of(std::vector<std::uint8_t>(64), 3));
      FAIL("expected OutOfPacketMemory");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::OutOfPacketMemory);
    }
    CHECK(mem.stats().dropped_no_memory == 1);
    mem.free_descriptor();                                                      // frees [0, 64)
    CHECK(mem.dma_write(pkt_of(std::vector<std::uint8_t>(48), 4)).descriptor.base_addr == 0);  // wrapped
    mem.dma_write(pkt_of(std::vector<std::uint8_t>(8), 5));
    try {
      mem.dma_write(pkt_of(std::vector<std::uint8_t>(8), 6));
      FAIL("expected DescriptorFifoFull");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DescriptorFifoFull);
    }
    CHECK(mem.stats().dropped_fifo_full == 1);
    CHECK(mem.stats().accepted == 4);
  }

  TEST_CASE("FIFO order is arrival order") {
    PacketMemory mem(1 << 16);
    for (std::uint64_t i = 0; i < 100; ++i) mem.dma_write(pkt_of(std::vector<std::uint8_t>(60 + i), i));
    for (std::uint64_t i = 0; i < 100; ++i) CHECK(mem.free_descriptor().pkt_id == i);
  }

  TEST_CASE("memory accounting against an interval oracle (10^4 operations)") {
    std::mt19937_64 rng(5);
    PacketMemory mem(4096, 0x8000, 64);
    std::map<std::uint64_t, std::uint64_t> live;  // base -> size
    std::uint64_t id = 0;
    for (int op = 0; op < 10000; ++op) {
      if (rng() % 100 < 55 || mem.descriptors().empty()) {
        try {
          const auto r = mem.dma_write(pkt_of(std::vector<std::uint8_t>(1 + rng() % 600), id++));
          live[r.descriptor.base_addr] = PacketMemory::allocation_size(r.descriptor.length);
        } catch (const Error&) {
        }
      } else {
        live.erase(mem.free_descriptor().base_addr);
      }
      std::uint64_t used = 0, prev_end = 0x8000;
      for (auto [base, size] : live) {
        REQUIRE(base >= prev_end);
        REQUIRE(base + size <= 0x8000 + 4096);
        prev_end = base + size;
        used += size;
      }
      REQUIRE(mem.free_bytes() + used == 4096);
    }
  }

  TEST_CASE("pcap round trip in both byte orders") {
    TrafficSpec spec;
    spec.count = 20;
    spec.sizes = {64, 1024};
    const auto pkts = gen_synthetic(spec);
    for (bool big : {false, true}) {
      const auto path = temp_file(big ? "be.pcap" : "le.pcap");
      write_pcap(path, pkts, 100e6, big);
      PcapReader reader(path);
      CHECK(reader.swapped() == big);
      std::vector<Packet> back;
      while (auto p = reader.next()) back.push_back(std::move(*p));
      REQUIRE(back.size() == pkts.size());
      for (std::size_t i = 0; i < pkts.size(); ++i) {
        CHECK(back[i].bytes == pkts[i].bytes);
        CHECK(back[i].id == i);
      }
      std::filesystem::remove(path);
    }
  }

  TEST_CASE("pcap errors") {
    const auto path = temp_file("bad.pcap");
    write_bytes(path, std::vector<std::uint8_t>(24, 0));
    CHECK_THROWS_WITH_AS(read_pcap(path), doctest::Contains("not a classic pcap"), Error);

    TrafficSpec spec;
    spec.count = 2;
    write_pcap(path, gen_synthetic(spec));
    std::vector<std::uint8_t> bytes;
    {
      std::ifstream in(path, std::ios::binary);
      bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    auto truncated = bytes;
    truncated.resize(bytes.size() - 10);
    write_bytes(path, truncated);
    try {
      read_pcap(path);
      FAIL("expected TruncatedRecord");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TruncatedRecord);
    }
    auto raw_ip = bytes;
    raw_ip[20] = 101;
    write_bytes(path, raw_ip);
    try {
      read_pcap(path);
      FAIL("expected UnsupportedLinkType");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnsupportedLinkType);
    }
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_pcap(temp_file("missing.pcap")), Error);
  }
}
