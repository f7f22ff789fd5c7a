// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0

#include "scilib/residency_map.hpp"

#include <algorithm>
#include <string>

namespace scilib {

PageRange pages_of(const OperandSpan& span, std::uint64_t page_size) noexcept {
  const std::uint64_t bytes = operand_bytes(span);
  if (bytes == 0 || page_size == 0) return {span.base / (page_size ? page_size : 1), 0};
  const std::uint64_t first = span.base / page_size;
  const std::uint64_t last = (span.base + bytes - 1) / page_size;
  return {first, last - first + 1};
}

bool supported_page_size(std::uint64_t page_size) noexcept {
  return page_size == 4096 || page_size == 65536;
}

CapacityExceeded::CapacityExceeded(std::uint64_t needed, std::uint64_t capacity)
    : std::runtime_error("device capacity exceeded: " + std::to_string(needed) + " bytes needed, " +
                         std::to_string(capacity) + " available"),
      needed_(needed),
      capacity_(capacity) {}

ResidencyMap::ResidencyMap(std::uint64_t page_size, std::uint64_t capacity_bytes)
    : page_size_(page_size), capacity_bytes_(capacity_bytes) {
  if (page_size == 0 || (page_size & (page_size - 1)) != 0) {
    throw std::invalid_argument("page size must be a power of two, got " + std::to_string(page_size));
  }
}

PageState ResidencyMap::state(std::uint64_t page) const noexcept {
  auto it = chunks_.find(page / kChunkPages);
  if (it == chunks_.end()) return {};
  return it->second[page % kChunkPages];
}

PageState& ResidencyMap::at(std::uint64_t page) {
  auto& states = chunks_[page / kChunkPages];
  if (states.empty()) states.resize(kChunkPages);
  PageState& s = states[page % kChunkPages];
  if (!s.tracked) {
    s.tracked = true;
    ++tracked_;
  }
  return s;
}

std::uint64_t ResidencyMap::host_pages_in(PageRange range) const noexcept {
  std::uint64_t host = 0;
  std::uint64_t page = range.first;
  const std::uint64_t end = range.first + range.count;
  while (page < end) {
    const std::uint64_t chunk = page / kChunkPages;
    const std::uint64_t chunk_end = std::min(end, (chunk + 1) * kChunkPages);
    auto it = chunks_.find(chunk);
    if (it == chunks_.end()) {
      host += chunk_end - page;
    } else {
      for (; page < chunk_end; ++page) {
        if (it->second[page % kChunkPages].domain == MemoryDomain::kHost) ++host;
      }
    }
    page = chunk_end;
  }
  return host;
}

bool ResidencyMap::all_device(PageRange range) const noexcept {
  return range.count > 0 && host_pages_in(range) == 0;
}

bool ResidencyMap::migrate(std::uint64_t page, std::uint64_t tick) {
  PageState& s = at(page);
  if (s.domain == MemoryDomain::kDevice) return false;
  if (capacity_bytes_ != 0 && (device_ + 1) * page_size_ > capacity_bytes_) {
    throw CapacityExceeded((device_ + 1) * page_size_, capacity_bytes_);
  }
  s.domain = MemoryDomain::kDevice;
  s.first_use_tick = tick;
  s.last_touch_tick = tick;
  ++device_;
  return true;
}

void ResidencyMap::demote(std::uint64_t page) {
  PageState& s = at(page);
  if (s.domain == MemoryDomain::kDevice) {
    s.domain = MemoryDomain::kHost;
    s.first_use_tick = 0;
    --device_;
  }
}

}  // namespace scilib
