// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0

#include "scilib/policy.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace scilib {

std::string_view policy_name(Policy p) noexcept {
  switch (p) {
    case Policy::kCpuOnly: return "cpu_only";
    case Policy::kMemCopy: return "memcopy";
    case Policy::kCounter: return "counter";
    case Policy::kFirstUse: return "first_use";
  }
  return "?";
}

std::optional<Policy> parse_policy(std::string_view s) noexcept {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::replace(lower.begin(), lower.end(), '-', '_');
  if (lower == "off" || lower == "cpu_only" || lower == "cpu") return Policy::kCpuOnly;
  if (lower == "memcopy" || lower == "mem_copy") return Policy::kMemCopy;
  if (lower == "counter") return Policy::kCounter;
  if (lower == "first_use" || lower == "firstuse") return Policy::kFirstUse;
  return std::nullopt;
}

std::string_view action_name(ActionKind k) noexcept {
  switch (k) {
    case ActionKind::kCopyH2D: return "copy_h2d";
    case ActionKind::kCopyD2H: return "copy_d2h";
    case ActionKind::kMigrateH2D: return "migrate_h2d";
  }
  return "?";
}

std::uint64_t MovementPlan::bytes_moved() const noexcept {
  std::uint64_t total = 0;
  for (const auto& a : actions) total += a.bytes;
  return total;
}

std::uint64_t MovementPlan::migrated_bytes() const noexcept {
  std::uint64_t total = 0;
  for (const auto& a : actions) {
    if (a.kind == ActionKind::kMigrateH2D) total += a.bytes;
  }
  return total;
}

bool CounterEmulatorConfig::valid() const noexcept {
  return migration_cost_per_byte > 0 && remote_penalty_per_byte > 0 && window_floor >= 0;
}

std::uint64_t traffic_bytes(const OperandSpan& span) noexcept {
  const std::uint64_t bytes = operand_bytes(span);
  return span.role == OperandRole::kInput ? bytes : 2 * bytes;
}

std::vector<bool> counter_migration_choice(const BlasCall& call, const CounterEmulatorConfig& cfg) {
  double remote_traffic = 0.0;
  for (const auto& op : call.operands) remote_traffic += static_cast<double>(traffic_bytes(op));
  double window = cfg.window_floor + cfg.remote_penalty_per_byte * remote_traffic;

  std::vector<bool> choice(call.operands.size(), false);
  for (std::size_t i = 0; i < call.operands.size(); ++i) {
    const double cost = cfg.migration_cost_per_byte * static_cast<double>(operand_bytes(call.operands[i]));
    if (cost > window) break;
    window -= cost;
    choice[i] = true;
  }
  return choice;
}

namespace {

std::vector<PageRange> operand_ranges(const BlasCall& call, std::uint64_t page_size) {
  std::vector<PageRange> ranges;
  ranges.reserve(call.operands.size());
  for (const auto& op : call.operands) ranges.push_back(pages_of(op, page_size));
  return ranges;
}

// Pages that would have to move if every selected operand migrated. Aliased
// or overlapping operands are counted once.
std::uint64_t pending_host_pages(const ResidencyMap& map, const std::vector<PageRange>& ranges,
                                 const std::vector<bool>& selected) {
  std::vector<PageRange> chosen;
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (selected[i] && ranges[i].count > 0) chosen.push_back(ranges[i]);
  }
  std::sort(chosen.begin(), chosen.end(), [](const PageRange& a, const PageRange& b) { return a.first < b.first; });
  std::uint64_t pages = 0;
  std::uint64_t cursor = 0;
  for (const auto& r : chosen) {
    const std::uint64_t start = std::max(cursor, r.first);
    const std::uint64_t end = r.first + r.count;
    if (start < end) pages += map.host_pages_in({start, end - start});
    cursor = std::max(cursor, end);
  }
  return pages;
}

void check_capacity(const ResidencyMap& map, const std::vector<PageRange>& ranges,
                    const std::vector<bool>& selected) {
  if (map.capacity_bytes() == 0) return;
  const std::uint64_t needed = map.device_bytes() + pending_host_pages(map, ranges, selected) * map.page_size();
  if (needed > map.capacity_bytes()) throw CapacityExceeded(needed, map.capacity_bytes());
}

// Touches every page of `range`: resident pages count a reuse (once per
// tick), HOST pages migrate when `migrate` is set. Returns the action, if
// any bytes moved.
std::optional<MovementAction> visit_operand(ResidencyMap& map, PageRange range, std::size_t operand, bool migrate,
                                            std::uint64_t tick) {
  MovementAction action;
  action.kind = ActionKind::kMigrateH2D;
  action.operand = operand;
  for (std::uint64_t page = range.first; page < range.first + range.count; ++page) {
    PageState& s = map.at(page);
    if (s.domain == MemoryDomain::kDevice) {
      if (s.first_use_tick != tick && s.last_touch_tick != tick) ++s.device_reuse_count;
      s.last_touch_tick = tick;
      continue;
    }
    if (!migrate) continue;
    map.migrate(page, tick);
    action.bytes += map.page_size();
    if (!action.runs.empty() && action.runs.back().first + action.runs.back().count == page) {
      ++action.runs.back().count;
    } else {
      action.runs.push_back({page, 1});
    }
  }
  if (action.bytes == 0) return std::nullopt;
  return action;
}

MovementPlan plan_migrations(const BlasCall& call, ResidencyMap& map, const std::vector<bool>& selected,
                             std::uint64_t tick) {
  const auto ranges = operand_ranges(call, map.page_size());
  check_capacity(map, ranges, selected);

  MovementPlan plan;
  plan.kernel_domain = MemoryDomain::kDevice;
  plan.operand_reused.reserve(ranges.size());
  for (const auto& r : ranges) plan.operand_reused.push_back(map.all_device(r));

  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (auto action = visit_operand(map, ranges[i], i, selected[i], tick)) plan.actions.push_back(std::move(*action));
  }
  plan.operand_domains.reserve(ranges.size());
  for (const auto& r : ranges) {
    plan.operand_domains.push_back(map.all_device(r) ? MemoryDomain::kDevice : MemoryDomain::kHost);
  }
  return plan;
}

}  // namespace

MovementPlan plan_memcopy(const BlasCall& call) {
  MovementPlan plan;
  plan.kernel_domain = MemoryDomain::kDevice;
  plan.device_allocations = true;
  for (std::size_t i = 0; i < call.operands.size(); ++i) {
    const auto& op = call.operands[i];
    if (op.role != OperandRole::kOutput) plan.actions.push_back({ActionKind::kCopyH2D, operand_bytes(op), i, {}});
  }
  for (std::size_t i = 0; i < call.operands.size(); ++i) {
    const auto& op = call.operands[i];
    if (op.role != OperandRole::kInput) plan.actions.push_back({ActionKind::kCopyD2H, operand_bytes(op), i, {}});
  }
  plan.operand_domains.assign(call.operands.size(), MemoryDomain::kDevice);
  plan.operand_reused.assign(call.operands.size(), false);
  return plan;
}

MovementPlan plan_first_use(const BlasCall& call, ResidencyMap& map, std::uint64_t tick) {
  return plan_migrations(call, map, std::vector<bool>(call.operands.size(), true), tick);
}

MovementPlan plan_counter_emulated(const BlasCall& call, ResidencyMap& map, const CounterEmulatorConfig& cfg,
                                   std::uint64_t tick) {
  return plan_migrations(call, map, counter_migration_choice(call, cfg), tick);
}

MovementPlan record_cpu_execution(const BlasCall& call, const ResidencyMap& map) {
  MovementPlan plan;
  plan.kernel_domain = MemoryDomain::kHost;
  for (const auto& op : call.operands) {
    plan.operand_domains.push_back(map.all_device(pages_of(op, map.page_size())) ? MemoryDomain::kDevice
                                                                                  : MemoryDomain::kHost);
  }
  plan.operand_reused.assign(call.operands.size(), false);
  return plan;
}

}  // namespace scilib
