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

// Receive path: header slicer, packet-buffer DMA with descriptor FIFO,
// m-plane CSR mirror, and packet sources (pcap files, synthetic traffic).

#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vebpf/verdict.hpp"

namespace vebpf::pktio {

inline constexpr std::size_t kEthHeaderLen = 14;
inline constexpr std::uint16_t kEtherTypeIpv4 = 0x0800;
inline constexpr std::uint16_t kEtherTypeIpv6 = 0x86dd;
inline constexpr std::uint8_t kProtoTcp = 6;
inline constexpr std::uint8_t kProtoUdp = 17;

struct Packet {
  std::vector<std::uint8_t> bytes;
  std::uint64_t arrival_tick = 0;
  std::uint64_t id = 0;
};

struct HeaderSlice {
  std::vector<std::uint8_t> bytes;
  std::size_t length() const { return bytes.size(); }
};

struct AutoSlice {};
struct FixedSlice {
  std::size_t length;
};
using SliceMode = std::variant<AutoSlice, FixedSlice>;

/// Length the auto slicer would pick: end of the L4 header for IPv4/IPv6
/// TCP/UDP, end of the L3 header for other IP protocols, 14 for non-IP
/// ethertypes. Never exceeds the packet length.
std::size_t parsed_header_length(std::span<const std::uint8_t> pkt);

/// Header slice capped at min(packet length, data_depth).
HeaderSlice slice_header(const Packet& pkt, const SliceMode& mode, std::size_t data_depth);

struct PacketDescriptor {
  std::uint64_t pkt_id = 0;
  std::uint64_t base_addr = 0;
  std::uint32_t length = 0;
  std::uint64_t arrival_tick = 0;
  std::optional<Verdict> verdict;
  std::optional<std::uint64_t> verdict_tick;
};

struct DmaResult {
  PacketDescriptor descriptor;
  /// Bus cycles to land the packet: ceil(length / 8).
  std::uint64_t bus_cycles = 0;
};

struct IngressStats {
  std::uint64_t accepted = 0;
  std::uint64_t dropped_no_memory = 0;
  std::uint64_t dropped_fifo_full = 0;
};

/// Packet buffer plus the RxPkt descriptor table FIFO.
///
/// Bump allocator over [base, base + capacity): each packet takes its
/// length rounded up to 8 bytes at the write cursor; when the tail cannot
/// hold it the cursor wraps to base. Frees are FIFO, so the live buffers
/// always form one ring segment and never overlap.
class PacketMemory {
 public:
  static constexpr std::uint64_t kGranularity = 8;
  static constexpr std::size_t kDefaultFifoDepth = 256;

  PacketMemory(std::uint64_t capacity, std::uint64_t base = 0, std::size_t fifo_depth = kDefaultFifoDepth);

  /// Copies `pkt` into the buffer and pushes its descriptor. On
  /// OutOfPacketMemory / DescriptorFifoFull the packet is dropped, counted
  /// in stats(), and Error is thrown.
  DmaResult dma_write(const Packet& pkt);

  /// Pops the oldest descriptor and returns its memory. Throws EmptyFifo.
  PacketDescriptor free_descriptor();

  /// Appends a verdict to the live descriptor of `pkt_id`. Returns false if
  /// no such descriptor is live or it already has a verdict.
  bool set_verdict(std::uint64_t pkt_id, const Verdict& verdict, std::uint64_t tick);

  /// Oldest descriptor that carries a verdict, without popping it.
  std::optional<PacketDescriptor> read_descriptor_with_result() const;

  static std::uint64_t allocation_size(std::uint64_t length) {
    return (length + kGranularity - 1) / kGranularity * kGranularity;
  }

  std::uint64_t capacity() const { return capacity_; }
  std::uint64_t base() const { return base_; }
  std::uint64_t free_bytes() const { return free_bytes_; }
  std::uint64_t write_cursor() const { return cursor_; }
  std::size_t fifo_depth() const { return fifo_depth_; }
  const std::deque<PacketDescriptor>& descriptors() const { return fifo_; }
  const IngressStats& stats() const { return stats_; }
  std::span<const std::uint8_t> bytes(std::uint64_t addr, std::uint64_t length) const;

 private:
  std::optional<std::uint64_t> place(std::uint64_t size) const;

  std::uint64_t capacity_;
  std::uint64_t base_;
  std::size_t fifo_depth_;
  std::uint64_t free_bytes_;
  std::uint64_t cursor_;
  std::vector<std::uint8_t> storage_;
  std::deque<PacketDescriptor> fifo_;
  IngressStats stats_;
};

/// Handshake flags shared between the receive path and the engine.
struct Flags {
  bool rxpkthdr_available = false;
  bool data_loading_done = false;
  bool all_rules_uploaded = false;
  bool result_registered = false;
  bool load_next_rxpkthdr = false;
  bool rst_new_rules = false;

  friend bool operator==(const Flags&, const Flags&) = default;
};

/// m-plane view: what the host reads over MMIO at a cycle boundary.
struct CsrFile {
  std::uint64_t mem_base = 0;
  std::uint64_t mem_size = 0;
  std::uint32_t rules_count = 0;
  std::uint32_t cores_count = 0;
  Flags flags;
};

/// m-plane readout of the descriptor table with results.
std::optional<PacketDescriptor> read_descriptor_with_result(const CsrFile& csr, const PacketMemory& mem);

// ---------------------------------------------------------------------------
// pcap

/// Classic pcap reader (microsecond or nanosecond magic, either byte order).
/// Link type must be Ethernet (1). Packets come out in file order with
/// sequential ids and arrival_tick 0.
class PcapReader {
 public:
  explicit PcapReader(const std::filesystem::path& path);

  /// Next packet, or nullopt at a clean end of file. Throws TruncatedRecord.
  std::optional<Packet> next();
  bool swapped() const { return swapped_; }

 private:
  std::uint32_t u32(const std::uint8_t* p) const;

  std::ifstream in_;
  bool swapped_ = false;
  std::uint64_t next_id_ = 0;
};

std::vector<Packet> read_pcap(const std::filesystem::path& path);

/// Writes a little-endian microsecond pcap; timestamps are the arrival tick
/// converted at `clock_hz`.
void write_pcap(const std::filesystem::path& path, std::span<const Packet> packets, double clock_hz = 100e6,
                bool big_endian = false);

// ---------------------------------------------------------------------------
// synthetic traffic

/// What the malicious share of a synthetic stream carries.
enum class TrafficMix {
  Benign,  // no blocked value anywhere
  Type1,   // blocked source IPv4
  Type2,   // blocked network-service UDP destination port
  Type3,   // blocked file-system UDP destination port
  Type4,   // any of the above
};
std::optional<TrafficMix> parse_traffic_mix(std::string_view text);
std::string_view to_string(TrafficMix mix);

struct TrafficSpec {
  std::uint64_t count = 2000;
  std::vector<std::uint32_t> sizes{64};
  std::uint64_t rate_bps = 100'000'000;
  std::uint64_t clock_hz = 100'000'000;
  TrafficMix mix = TrafficMix::Benign;
  /// Share of packets drawn from `mix`; the rest are benign.
  double malicious_fraction = 1.0;
  std::uint64_t seed = 1;
};

inline constexpr std::uint32_t kMinSyntheticSize = 42;  // Ethernet + IPv4 + UDP
inline constexpr std::uint32_t kMaxSyntheticSize = 9018;

/// Cycles one frame of `size` bytes occupies on the wire at the given rate,
/// rounded up. No preamble/IFG overhead is counted.
std::uint64_t inter_arrival_cycles(std::uint32_t size, std::uint64_t rate_bps, std::uint64_t clock_hz);

/// Deterministic per seed. Packet i arrives at the sum of the wire times of
/// packets 0..i-1 (the first at tick 0). Throws InvalidSpec.
std::vector<Packet> gen_synthetic(const TrafficSpec& spec);

/// Assigns back-to-back arrival ticks to packets read from a capture.
void assign_arrivals(std::vector<Packet>& packets, std::uint64_t rate_bps, std::uint64_t clock_hz);

/// Builds an Ethernet/IPv4/UDP frame of exactly `size` bytes (>= 42).
std::vector<std::uint8_t> make_udp_frame(std::uint32_t src_ip, std::uint32_t dst_ip, std::uint16_t src_port,
                                         std::uint16_t dst_port, std::uint32_t size);
/// Ethernet/IPv4/TCP frame of exactly `size` bytes (>= 54).
std::vector<std::uint8_t> make_tcp_frame(std::uint32_t src_ip, std::uint32_t dst_ip, std::uint16_t src_port,
                                         std::uint16_t dst_port, std::uint32_t size);

}  // namespace vebpf::pktio
