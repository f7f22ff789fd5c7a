// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "scilib/blas_model.hpp"

namespace scilib {

// HOST mirrors the CPU-attached NUMA node, DEVICE the accelerator-attached one.
enum class MemoryDomain : std::uint8_t { kHost, kDevice };

struct PageRange {
  std::uint64_t first = 0;
  std::uint64_t count = 0;

  std::uint64_t last() const noexcept { return first + count - 1; }
  friend bool operator==(const PageRange&, const PageRange&) = default;
};

// Page indices covering [base, base + operand_bytes(span)).
PageRange pages_of(const OperandSpan& span, std::uint64_t page_size) noexcept;

bool supported_page_size(std::uint64_t page_size) noexcept;

struct PageState {
  MemoryDomain domain = MemoryDomain::kHost;
  bool tracked = false;
  std::uint32_t device_reuse_count = 0;
  std::uint64_t first_use_tick = 0;  // 0: never migrated
  std::uint64_t last_touch_tick = 0;
};

class CapacityExceeded : public std::runtime_error {
 public:
  CapacityExceeded(std::uint64_t needed, std::uint64_t capacity);
  std::uint64_t needed() const noexcept { return needed_; }
  std::uint64_t capacity() const noexcept { return capacity_; }

 private:
  std::uint64_t needed_;
  std::uint64_t capacity_;
};

// Page-granular residency record. Storage is a two-level table so that the
// contiguous page runs of large operands stay cache friendly.
class ResidencyMap {
 public:
  explicit ResidencyMap(std::uint64_t page_size = 65536, std::uint64_t capacity_bytes = 0);

  std::uint64_t page_size() const noexcept { return page_size_; }
  // 0 means unbounded.
  std::uint64_t capacity_bytes() const noexcept { return capacity_bytes_; }

  // Untracked pages read as a default (HOST, untracked) state.
  PageState state(std::uint64_t page) const noexcept;
  MemoryDomain domain(std::uint64_t page) const noexcept { return state(page).domain; }

  PageState& at(std::uint64_t page);

  std::uint64_t tracked_pages() const noexcept { return tracked_; }
  std::uint64_t device_pages() const noexcept { return device_; }
  std::uint64_t device_bytes() const noexcept { return device_ * page_size_; }

  // Number of pages in `range` currently on HOST.
  std::uint64_t host_pages_in(PageRange range) const noexcept;
  bool all_device(PageRange range) const noexcept;

  // Marks the page DEVICE; returns false if it was already there.
  bool migrate(std::uint64_t page, std::uint64_t tick);
  // Reverts a page to HOST, used when the OS refuses a migration.
  void demote(std::uint64_t page);

  template <class Fn>
  void for_each_tracked(Fn&& fn) const {
    for (const auto& [chunk, states] : chunks_) {
      for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i].tracked) fn(chunk * kChunkPages + i, states[i]);
      }
    }
  }

 private:
  static constexpr std::uint64_t kChunkPages = 512;

  std::uint64_t page_size_;
  std::uint64_t capacity_bytes_;
  std::uint64_t tracked_ = 0;
  std::uint64_t device_ = 0;
  std::unordered_map<std::uint64_t, std::vector<PageState>> chunks_;
};

}  // namespace scilib
