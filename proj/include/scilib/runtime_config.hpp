// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Interposer configuration, read once from the environment:
//
//   SCILIB_MODE       off | memcopy | counter | first_use   (first_use)
//   SCILIB_THRESHOLD  offload when N_avg exceeds this        (500)
//   SCILIB_TRACE      path of the JSON-lines trace           (unset)
//   SCILIB_DEBUG      0..3                                   (0)
//   SCILIB_CAPACITY   device capacity in bytes, K/M/G suffix (unbounded)
//   SCILIB_MIGRATION  os | simulated | none                  (autodetect)
//   SCILIB_DEVICE     mock | reject                          (mock)
//   SCILIB_PAGE_SIZE  4096 | 65536                           (system page size)

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scilib/policy.hpp"

namespace scilib {

enum class MigrationMode : std::uint8_t { kOsMovePages, kSimulated, kNone };
// kReject is a device backend that refuses every call; it exercises the
// CPU fallback path.
enum class DeviceKind : std::uint8_t { kMock, kReject };

std::string_view migration_name(MigrationMode m) noexcept;
std::string_view device_name(DeviceKind d) noexcept;

struct RuntimeConfig {
  Policy mode = Policy::kFirstUse;  // kCpuOnly means OFF
  double threshold = kDefaultThreshold;
  std::optional<std::uint64_t> page_size;
  int debug_level = 0;
  std::optional<std::string> trace_path;
  std::optional<std::uint64_t> capacity_bytes;
  std::optional<MigrationMode> migration;
  DeviceKind device = DeviceKind::kMock;
};

using EnvLookup = std::function<const char*(const char*)>;

// Unparseable values fall back to their default and append a message to
// `warnings`.
RuntimeConfig parse_runtime_config(const EnvLookup& env, std::vector<std::string>& warnings);

// Accepts plain byte counts or a K/M/G/T (binary) suffix.
std::optional<std::uint64_t> parse_byte_size(std::string_view text) noexcept;

}  // namespace scilib
