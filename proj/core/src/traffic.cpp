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

#include <cmath>
#include <random>

#include "vebpf/error.hpp"
#include "vebpf/pktio.hpp"
#include "vebpf/rules.hpp"

namespace vebpf::pktio {

namespace {

// std::uniform_int_distribution is implementation-defined; streams must be
// byte-identical across standard libraries, so draws go through these.
std::uint64_t draw(std::mt19937_64& rng, std::uint64_t n) { return n <= 1 ? 0 : rng() % n; }
double draw_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void put16(std::vector<std::uint8_t>& f, std::size_t at, std::uint16_t v) {
  f[at] = static_cast<std::uint8_t>(v >> 8);
  f[at + 1] = static_cast<std::uint8_t>(v);
}
void put32(std::vector<std::uint8_t>& f, std::size_t at, std::uint32_t v) {
  put16(f, at, static_cast<std::uint16_t>(v >> 16));
  put16(f, at + 2, static_cast<std::uint16_t>(v));
}

std::vector<std::uint8_t> ipv4_frame(std::uint8_t proto, std::uint32_t src_ip, std::uint32_t dst_ip,
                                     std::uint32_t size) {
  std::vector<std::uint8_t> f(size, 0);
  const std::uint8_t dst_mac[6] = {0x02, 0x00, 0x00, 0x00, 0x00, 0x01};
  const std::uint8_t src_mac[6] = {0x02, 0x00, 0x00, 0x00, 0x00, 0x02};
  std::copy(dst_mac, dst_mac + 6, f.begin());
  std::copy(src_mac, src_mac + 6, f.begin() + 6);
  put16(f, 12, kEtherTypeIpv4);
  f[14] = 0x45;
  put16(f, 16, static_cast<std::uint16_t>(size - kEthHeaderLen));
  put16(f, 20, 0x4000);  // DF
  f[22] = 64;
  f[23] = proto;
  put32(f, 26, src_ip);
  put32(f, 30, dst_ip);
  std::uint32_t sum = 0;
  for (std::size_t i = 14; i < 34; i += 2) sum += static_cast<std::uint32_t>(f[i] << 8 | f[i + 1]);
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  put16(f, 24, static_cast<std::uint16_t>(~sum));
  return f;
}

void fill_payload(std::vector<std::uint8_t>& f, std::size_t from) {
  for (std::size_t i = from; i < f.size(); ++i) f[i] = static_cast<std::uint8_t>(i * 7 + 1);
}

std::uint32_t benign_ip(std::mt19937_64& rng) {
  // first octet in 1..223, not 127: outside every blocked prefix
  std::uint32_t first = 1 + static_cast<std::uint32_t>(draw(rng, 222));
  if (first >= 127) ++first;
  return first << 24 | static_cast<std::uint32_t>(draw(rng, 1u << 24));
}

bool port_blocked(std::uint16_t port) {
  for (const auto& spec : rules::firewall_table()) {
    if (const auto* p = std::get_if<rules::BlockUdpDstPort>(&spec.kind); p && p->port == port) return true;
  }
  return false;
}

std::uint16_t benign_port(std::mt19937_64& rng) {
  for (;;) {
    auto port = static_cast<std::uint16_t>(1 + draw(rng, 65535));
    if (!port_blocked(port)) return port;
  }
}

std::uint32_t ip_in_prefix(const rules::Ipv4Prefix& prefix, std::mt19937_64& rng) {
  if (prefix.length >= 32) return prefix.addr;
  const std::uint32_t host_bits = 32u - prefix.length;
  const std::uint32_t mask = host_bits >= 32 ? 0xffffffffu : (1u << host_bits) - 1;
  return (prefix.addr & ~mask) | (static_cast<std::uint32_t>(rng()) & mask);
}

}  // namespace

std::optional<TrafficMix> parse_traffic_mix(std::string_view text) {
  if (text == "benign") return TrafficMix::Benign;
  if (text == "type1") return TrafficMix::Type1;
  if (text == "type2") return TrafficMix::Type2;
  if (text == "type3") return TrafficMix::Type3;
  if (text == "type4") return TrafficMix::Type4;
  return std::nullopt;
}

std::string_view to_string(TrafficMix mix) {
  switch (mix) {
    case TrafficMix::Benign: return "benign";
    case TrafficMix::Type1: return "type1";
    case TrafficMix::Type2: return "type2";
    case TrafficMix::Type3: return "type3";
    case TrafficMix::Type4: return "type4";
  }
  return "?";
}

std::uint64_t inter_arrival_cycles(std::uint32_t size, std::uint64_t rate_bps, std::uint64_t clock_hz) {
  const unsigned __int128 num = static_cast<unsigned __int128>(size) * 8u * clock_hz;
  return static_cast<std::uint64_t>((num + rate_bps - 1) / rate_bps);
}

std::vector<std::uint8_t> make_udp_frame(std::uint32_t src_ip, std::uint32_t dst_ip, std::uint16_t src_port,
                                         std::uint16_t dst_port, std::uint32_t size) {
  if (size < kMinSyntheticSize) throw Error(ErrorCode::InvalidSpec, "UDP frame needs at least 42 bytes");
  auto f = ipv4_frame(kProtoUdp, src_ip, dst_ip, size);
  put16(f, 34, src_port);
  put16(f, 36, dst_port);
  put16(f, 38, static_cast<std::uint16_t>(size - 34));
  fill_payload(f, 42);
  return f;
}

std::vector<std::uint8_t> make_tcp_frame(std::uint32_t src_ip, std::uint32_t dst_ip, std::uint16_t src_port,
                                         std::uint16_t dst_port, std::uint32_t size) {
  if (size < 54) throw Error(ErrorCode::InvalidSpec, "TCP frame needs at least 54 bytes");
  auto f = ipv4_frame(kProtoTcp, src_ip, dst_ip, size);
  put16(f, 34, src_port);
  put16(f, 36, dst_port);
  f[46] = 5 << 4;  // data offset
  f[47] = 0x10;    // ACK
  put16(f, 48, 65535);
  fill_payload(f, 54);
  return f;
}

std::vector<Packet> gen_synthetic(const TrafficSpec& spec) {
  if (spec.sizes.empty()) throw Error(ErrorCode::InvalidSpec, "traffic spec needs at least one packet size");
  for (auto s : spec.sizes) {
    if (s < kMinSyntheticSize || s > kMaxSyntheticSize) {
      throw Error(ErrorCode::InvalidSpec, "packet size " + std::to_string(s) + " outside [42, 9018]");
    }
  }
  if (spec.rate_bps == 0 || spec.clock_hz == 0) throw Error(ErrorCode::InvalidSpec, "rate and clock must be nonzero");
  if (!(spec.malicious_fraction >= 0.0 && spec.malicious_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "malicious_fraction must be in [0, 1]");
  }

  std::vector<const rules::FirewallRuleSpec*> pool;
  for (const auto& r : rules::firewall_table()) {
    const bool in_mix = spec.mix == TrafficMix::Type4 || (spec.mix == TrafficMix::Type1 && r.type == 1) ||
                        (spec.mix == TrafficMix::Type2 && r.type == 2) ||
                        (spec.mix == TrafficMix::Type3 && r.type == 3);
    if (in_mix) pool.push_back(&r);
  }

  std::mt19937_64 rng(spec.seed);
  std::vector<Packet> out;
  out.reserve(spec.count);
  std::uint64_t tick = 0;
  for (std::uint64_t i = 0; i < spec.count; ++i) {
    const std::uint32_t size = spec.sizes[draw(rng, spec.sizes.size())];
    const bool malicious = !pool.empty() && draw_unit(rng) < spec.malicious_fraction;
    std::uint32_t src_ip = benign_ip(rng);
    const std::uint32_t dst_ip = 0xc0a80000u | static_cast<std::uint32_t>(draw(rng, 1u << 16));
    const auto src_port = static_cast<std::uint16_t>(1024 + draw(rng, 64512));
    std::uint16_t dst_port = benign_port(rng);
    bool tcp = false;
    if (malicious) {
      const auto* rule = pool[draw(rng, pool.size())];
      if (const auto* ip = std::get_if<rules::BlockSrcIp>(&rule->kind)) {
        src_ip = ip_in_prefix(ip->prefix, rng);
      } else {
        dst_port = std::get<rules::BlockUdpDstPort>(rule->kind).port;
      }
    } else {
      tcp = size >= 54 && draw(rng, 4) == 0;
    }
    Packet pkt;
    pkt.id = i;
    pkt.arrival_tick = tick;
    pkt.bytes = tcp ? make_tcp_frame(src_ip, dst_ip, src_port, dst_port, size)
                    : make_udp_frame(src_ip, dst_ip, src_port, dst_port, size);
    tick += inter_arrival_cycles(size, spec.rate_bps, spec.clock_hz);
    out.push_back(std::move(pkt));
  }
  return out;
}

void assign_arrivals(std::vector<Packet>& packets, std::uint64_t rate_bps, std::uint64_t clock_hz) {
  if (rate_bps == 0 || clock_hz == 0) throw Error(ErrorCode::InvalidSpec, "rate and clock must be nonzero");
  std::uint64_t tick = 0;
  for (auto& p : packets) {
    p.arrival_tick = tick;
    tick += inter_arrival_cycles(static_cast<std::uint32_t>(p.bytes.size()), rate_bps, clock_hz);
  }
}

}  // namespace vebpf::pktio
