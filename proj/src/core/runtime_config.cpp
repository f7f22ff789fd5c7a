// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0

#include "scilib/runtime_config.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "scilib/residency_map.hpp"

namespace scilib {

std::string_view migration_name(MigrationMode m) noexcept {
  switch (m) {
    case MigrationMode::kOsMovePages: return "os";
    case MigrationMode::kSimulated: return "simulated";
    case MigrationMode::kNone: return "none";
  }
  return "?";
}

std::string_view device_name(DeviceKind d) noexcept {
  switch (d) {
    case DeviceKind::kMock: return "mock";
    case DeviceKind::kReject: return "reject";
  }
  return "?";
}

std::optional<std::uint64_t> parse_byte_size(std::string_view text) noexcept {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr == text.data()) return std::nullopt;
  std::string_view rest(ptr, static_cast<std::size_t>(text.data() + text.size() - ptr));
  if (rest.empty()) return value;
  unsigned shift = 0;
  switch (rest[0]) {
    case 'k': case 'K': shift = 10; break;
    case 'm': case 'M': shift = 20; break;
    case 'g': case 'G': shift = 30; break;
    case 't': case 'T': shift = 40; break;
    default: return std::nullopt;
  }
  rest.remove_prefix(1);
  if (!rest.empty() && rest != "B" && rest != "b" && rest != "iB") return std::nullopt;
  if (value > (std::numeric_limits<std::uint64_t>::max() >> shift)) return std::nullopt;
  return value << shift;
}

RuntimeConfig parse_runtime_config(const EnvLookup& env, std::vector<std::string>& warnings) {
  RuntimeConfig cfg;
  auto get = [&](const char* name) -> std::optional<std::string_view> {
    const char* v = env(name);
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string_view(v);
  };
  auto warn = [&](const char* name, std::string_view value, const std::string& fallback) {
    warnings.push_back(std::string("ignoring ") + name + "='" + std::string(value) + "', using " + fallback);
  };

  if (auto v = get("SCILIB_MODE")) {
    if (auto p = parse_policy(*v)) {
      cfg.mode = *p;
    } else {
      warn("SCILIB_MODE", *v, "first_use");
    }
  }
  if (auto v = get("SCILIB_THRESHOLD")) {
    double t = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), t);
    if (ec == std::errc() && ptr == v->data() + v->size() && std::isfinite(t) && t > 0) {
      cfg.threshold = t;
    } else {
      warn("SCILIB_THRESHOLD", *v, "500");
    }
  }
  if (auto v = get("SCILIB_TRACE")) cfg.trace_path = std::string(*v);
  if (auto v = get("SCILIB_DEBUG")) {
    int level = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), level);
    if (ec == std::errc() && ptr == v->data() + v->size() && level >= 0 && level <= 3) {
      cfg.debug_level = level;
    } else {
      warn("SCILIB_DEBUG", *v, "0");
    }
  }
  if (auto v = get("SCILIB_CAPACITY")) {
    auto bytes = parse_byte_size(*v);
    if (bytes && *bytes > 0) {
      cfg.capacity_bytes = bytes;
    } else {
      warn("SCILIB_CAPACITY", *v, "unbounded");
    }
  }
  if (auto v = get("SCILIB_MIGRATION")) {
    if (*v == "os") {
      cfg.migration = MigrationMode::kOsMovePages;
    } else if (*v == "simulated") {
      cfg.migration = MigrationMode::kSimulated;
    } else if (*v == "none") {
      cfg.migration = MigrationMode::kNone;
    } else {
      warn("SCILIB_MIGRATION", *v, "autodetect");
    }
  }
  if (auto v = get("SCILIB_DEVICE")) {
    if (*v == "mock") {
      cfg.device = DeviceKind::kMock;
    } else if (*v == "reject") {
      cfg.device = DeviceKind::kReject;
    } else {
      warn("SCILIB_DEVICE", *v, "mock");
    }
  }
  if (auto v = get("SCILIB_PAGE_SIZE")) {
    auto bytes = parse_byte_size(*v);
    if (bytes && supported_page_size(*bytes)) {
      cfg.page_size = bytes;
    } else {
      warn("SCILIB_PAGE_SIZE", *v, "the system page size");
    }
  }
  return cfg;
}

}  // namespace scilib
