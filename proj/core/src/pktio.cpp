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

#include "vebpf/pktio.hpp"

#include <algorithm>
#include <cstring>

#include "vebpf/error.hpp"

namespace vebpf::pktio {

// ---------------------------------------------------------------------------
// slicer

namespace {

std::size_t l4_header_end(std::span<const std::uint8_t> pkt, std::size_t l4_start, std::uint8_t proto) {
  if (proto == kProtoUdp) return l4_start + 8;
  if (proto == kProtoTcp) {
    if (pkt.size() <= l4_start + 12) return l4_start + 20;
    const std::size_t data_offset = static_cast<std::size_t>(pkt[l4_start + 12] >> 4) * 4;
    return l4_start + std::max<std::size_t>(data_offset, 20);
  }
  return l4_start;
}

}  // namespace

std::size_t parsed_header_length(std::span<const std::uint8_t> pkt) {
  const std::size_t n = pkt.size();
  if (n < kEthHeaderLen) return n;
  const std::uint16_t ethertype = static_cast<std::uint16_t>(pkt[12] << 8 | pkt[13]);
  std::size_t end = kEthHeaderLen;
  if (ethertype == kEtherTypeIpv4) {
    if (n < kEthHeaderLen + 20) return n;
    const std::size_t ihl = static_cast<std::size_t>(pkt[kEthHeaderLen] & 0x0f) * 4;
    if (ihl < 20) return n;
    end = l4_header_end(pkt, kEthHeaderLen + ihl, pkt[kEthHeaderLen + 9]);
  } else if (ethertype == kEtherTypeIpv6) {
    if (n < kEthHeaderLen + 40) return n;
    end = l4_header_end(pkt, kEthHeaderLen + 40, pkt[kEthHeaderLen + 6]);
  }
  return std::min(end, n);
}

HeaderSlice slice_header(const Packet& pkt, const SliceMode& mode, std::size_t data_depth) {
  std::size_t len = 0;
  if (const auto* fixed = std::get_if<FixedSlice>(&mode)) {
    len = std::min(fixed->length, pkt.bytes.size());
  } else {
    len = parsed_header_length(pkt.bytes);
  }
  len = std::min(len, data_depth);
  return HeaderSlice{{pkt.bytes.begin(), pkt.bytes.begin() + static_cast<std::ptrdiff_t>(len)}};
}

// ---------------------------------------------------------------------------
// packet memory

PacketMemory::PacketMemory(std::uint64_t capacity, std::uint64_t base, std::size_t fifo_depth)
    : capacity_(capacity),
      base_(base),
      fifo_depth_(fifo_depth),
      free_bytes_(capacity),
      cursor_(base),
      storage_(capacity, 0) {
  if (capacity == 0 || capacity % kGranularity != 0) {
    throw Error(ErrorCode::InvalidSpec, "packet memory capacity must be a nonzero multiple of 8");
  }
  if (fifo_depth == 0) throw Error(ErrorCode::InvalidSpec, "descriptor FIFO depth must be nonzero");
}

std::optional<std::uint64_t> PacketMemory::place(std::uint64_t size) const {
  const std::uint64_t end = base_ + capacity_;
  if (fifo_.empty()) {
    if (size <= capacity_) return base_;
    return std::nullopt;
  }
  const std::uint64_t oldest = fifo_.front().base_addr;
  const bool wrapped = fifo_.back().base_addr < oldest;
  if (!wrapped) {
    if (size <= end - cursor_) return cursor_;
    if (size <= oldest - base_) return base_;
    return std::nullopt;
  }
  if (size <= oldest - cursor_) return cursor_;
  return std::nullopt;
}

DmaResult PacketMemory::dma_write(const Packet& pkt) {
  if (fifo_.size() >= fifo_depth_) {
    ++stats_.dropped_fifo_full;
    throw Error(ErrorCode::DescriptorFifoFull, "descriptor FIFO full; packet " + std::to_string(pkt.id) + " dropped");
  }
  const std::uint64_t len = pkt.bytes.size();
  const std::uint64_t alloc = allocation_size(len);
  std::optional<std::uint64_t> addr;
  if (alloc <= free_bytes_) addr = place(alloc);
  if (!addr) {
    ++stats_.dropped_no_memory;
    throw Error(ErrorCode::OutOfPacketMemory, "no room for " + std::to_string(len) + "-byte packet " +
                                                  std::to_string(pkt.id) + "; dropped");
  }
  if (len > 0) std::memcpy(storage_.data() + (*addr - base_), pkt.bytes.data(), len);
  PacketDescriptor d;
  d.pkt_id = pkt.id;
  d.base_addr = *addr;
  d.length = static_cast<std::uint32_t>(len);
  d.arrival_tick = pkt.arrival_tick;
  fifo_.push_back(d);
  free_bytes_ -= alloc;
  cursor_ = *addr + alloc;
  ++stats_.accepted;
  return DmaResult{d, (len + 7) / 8};
}

PacketDescriptor PacketMemory::free_descriptor() {
  if (fifo_.empty()) throw Error(ErrorCode::EmptyFifo, "descriptor FIFO is empty");
  PacketDescriptor d = fifo_.front();
  fifo_.pop_front();
  free_bytes_ += allocation_size(d.length);
  if (fifo_.empty()) cursor_ = base_;
  return d;
}

bool PacketMemory::set_verdict(std::uint64_t pkt_id, const Verdict& verdict, std::uint64_t tick) {
  for (auto& d : fifo_) {
    if (d.pkt_id != pkt_id) continue;
    if (d.verdict) return false;
    d.verdict = verdict;
    d.verdict_tick = tick;
    return true;
  }
  return false;
}

std::optional<PacketDescriptor> PacketMemory::read_descriptor_with_result() const {
  for (const auto& d : fifo_) {
    if (d.verdict) return d;
  }
  return std::nullopt;
}

std::span<const std::uint8_t> PacketMemory::bytes(std::uint64_t addr, std::uint64_t length) const {
  if (addr < base_ || addr - base_ > capacity_ || length > capacity_ - (addr - base_)) {
    throw Error(ErrorCode::OutOfPacketMemory, "read outside packet memory");
  }
  return std::span(storage_).subspan(addr - base_, length);
}

std::optional<PacketDescriptor> read_descriptor_with_result(const CsrFile&, const PacketMemory& mem) {
  return mem.read_descriptor_with_result();
}

}  // namespace vebpf::pktio
