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

#include <array>
#include <cmath>

#include "vebpf/error.hpp"
#include "vebpf/pktio.hpp"

namespace vebpf::pktio {

namespace {
constexpr std::uint32_t kMagicMicro = 0xa1b2c3d4;
constexpr std::uint32_t kMagicNano = 0xa1b23c4d;
constexpr std::uint32_t kLinkTypeEthernet = 1;
constexpr std::uint32_t kMaxRecordLen = 262144;

std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}
}  // namespace

PcapReader::PcapReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
  if (!in_) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::array<std::uint8_t, 24> hdr{};
  in_.read(reinterpret_cast<char*>(hdr.data()), hdr.size());
  if (in_.gcount() != static_cast<std::streamsize>(hdr.size())) {
    throw Error(ErrorCode::BadMagic, path.string() + ": too short for a pcap header");
  }
  const std::uint32_t magic = le32(hdr.data());
  if (magic == kMagicMicro || magic == kMagicNano) {
    swapped_ = false;
  } else if (magic == __builtin_bswap32(kMagicMicro) || magic == __builtin_bswap32(kMagicNano)) {
    swapped_ = true;
  } else {
    throw Error(ErrorCode::BadMagic, path.string() + ": not a classic pcap file");
  }
  const std::uint32_t link = u32(hdr.data() + 20) & 0x0fffffff;
  if (link != kLinkTypeEthernet) {
    throw Error(ErrorCode::UnsupportedLinkType, path.string() + ": link type " + std::to_string(link) +
                                                    " is not Ethernet");
  }
}

std::uint32_t PcapReader::u32(const std::uint8_t* p) const {
  const std::uint32_t v = le32(p);
  return swapped_ ? __builtin_bswap32(v) : v;
}

std::optional<Packet> PcapReader::next() {
  std::array<std::uint8_t, 16> rec{};
  in_.read(reinterpret_cast<char*>(rec.data()), rec.size());
  const auto got = in_.gcount();
  if (got == 0) return std::nullopt;
  if (got != static_cast<std::streamsize>(rec.size())) {
    throw Error(ErrorCode::TruncatedRecord, "pcap record header truncated after packet " + std::to_string(next_id_));
  }
  const std::uint32_t incl_len = u32(rec.data() + 8);
  if (incl_len > kMaxRecordLen) {
    throw Error(ErrorCode::TruncatedRecord, "pcap record length " + std::to_string(incl_len) + " is implausible");
  }
  Packet pkt;
  pkt.bytes.resize(incl_len);
  in_.read(reinterpret_cast<char*>(pkt.bytes.data()), incl_len);
  if (in_.gcount() != static_cast<std::streamsize>(incl_len)) {
    throw Error(ErrorCode::TruncatedRecord, "pcap record data truncated after packet " + std::to_string(next_id_));
  }
  pkt.id = next_id_++;
  return pkt;
}

std::vector<Packet> read_pcap(const std::filesystem::path& path) {
  PcapReader reader(path);
  std::vector<Packet> out;
  while (auto pkt = reader.next()) out.push_back(std::move(*pkt));
  return out;
}

void write_pcap(const std::filesystem::path& path, std::span<const Packet> packets, double clock_hz,
                bool big_endian) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  auto put32 = [&](std::uint32_t v) {
    if (big_endian) v = __builtin_bswap32(v);
    out.write(reinterpret_cast<const char*>(&v), 4);
  };
  auto put16 = [&](std::uint16_t v) {
    if (big_endian) v = static_cast<std::uint16_t>((v >> 8) | (v << 8));
    out.write(reinterpret_cast<const char*>(&v), 2);
  };
  put32(kMagicMicro);
  put16(2);
  put16(4);
  put32(0);
  put32(0);
  put32(65535);
  put32(kLinkTypeEthernet);
  for (const auto& p : packets) {
    const double seconds = static_cast<double>(p.arrival_tick) / clock_hz;
    const auto sec = static_cast<std::uint32_t>(seconds);
    const auto usec = static_cast<std::uint32_t>(std::llround((seconds - sec) * 1e6) % 1000000);
    put32(sec);
    put32(usec);
    put32(static_cast<std::uint32_t>(p.bytes.size()));
    put32(static_cast<std::uint32_t>(p.bytes.size()));
    out.write(reinterpret_cast<const char*>(p.bytes.data()), static_cast<std::streamsize>(p.bytes.size()));
  }
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

}  // namespace vebpf::pktio
