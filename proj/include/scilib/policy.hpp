// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Data-movement planners. Each planner turns one offloaded call into the
// list of transfers/migrations it requires and, for the stateful policies,
// updates the residency map in place. Callers serialize access to a map.

#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "scilib/blas_model.hpp"
#include "scilib/residency_map.hpp"

namespace scilib {

enum class Policy : std::uint8_t { kCpuOnly, kMemCopy, kCounter, kFirstUse };

inline constexpr Policy kAllPolicies[] = {Policy::kCpuOnly, Policy::kMemCopy, Policy::kCounter,
                                          Policy::kFirstUse};

std::string_view policy_name(Policy p) noexcept;
// Accepts the canonical names plus "off" for kCpuOnly; case-insensitive.
std::optional<Policy> parse_policy(std::string_view s) noexcept;

enum class ActionKind : std::uint8_t { kCopyH2D, kCopyD2H, kMigrateH2D };

std::string_view action_name(ActionKind k) noexcept;

struct MovementAction {
  ActionKind kind = ActionKind::kCopyH2D;
  std::uint64_t bytes = 0;
  std::size_t operand = 0;
  // Contiguous page runs moved by a migration; empty for copies.
  std::vector<PageRange> runs;
};

struct MovementPlan {
  std::vector<MovementAction> actions;
  MemoryDomain kernel_domain = MemoryDomain::kHost;
  // Where the kernel finds each operand once the plan has executed.
  std::vector<MemoryDomain> operand_domains;
  // True when the operand was fully device-resident before this call.
  std::vector<bool> operand_reused;
  // Kernel works on dedicated device allocations rather than the caller's
  // system-allocated buffers.
  bool device_allocations = false;

  std::uint64_t bytes_moved() const noexcept;
  std::uint64_t migrated_bytes() const noexcept;
};

// Single-kernel emulation of access-counter driven migration. Operands are
// considered in argument order; each one migrates only if its migration
// cost fits in what remains of the kernel's migration window, and the
// first operand that does not fit closes the window. The window grows with
// the remote traffic the kernel would generate. The decision depends only
// on the call, so an identical call repeats the same decision.
struct CounterEmulatorConfig {
  double migration_cost_per_byte = 1.0 / 450e9;
  double remote_penalty_per_byte = 1.0 / (3.0 * 450e9);
  double window_floor = 5.2e-4;

  bool valid() const noexcept;
  friend bool operator==(const CounterEmulatorConfig&, const CounterEmulatorConfig&) = default;
};

// Remote bytes the counter emulator attributes to one operand in one kernel.
std::uint64_t traffic_bytes(const OperandSpan& span) noexcept;

// Which operands the counter emulator elects to migrate, in argument order.
std::vector<bool> counter_migration_choice(const BlasCall& call, const CounterEmulatorConfig& cfg);

MovementPlan plan_memcopy(const BlasCall& call);
MovementPlan plan_first_use(const BlasCall& call, ResidencyMap& map, std::uint64_t tick);
MovementPlan plan_counter_emulated(const BlasCall& call, ResidencyMap& map, const CounterEmulatorConfig& cfg,
                                   std::uint64_t tick);
MovementPlan record_cpu_execution(const BlasCall& call, const ResidencyMap& map);

}  // namespace scilib
