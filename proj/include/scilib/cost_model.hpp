// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Roofline-style timing for BLAS kernels and data movement on a coherent
// CPU + accelerator node. Bandwidths are in GB/s (1e9 bytes/s), rates in
// flop/s, times in seconds.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scilib/blas_model.hpp"
#include "scilib/policy.hpp"
#include "scilib/residency_map.hpp"

namespace scilib {

struct CostModel {
  double bw_h2d = 450.0;
  double bw_d2h = 450.0;
  double bw_host_local = 418.0;       // CPU on host memory
  double bw_device_local = 3679.0;    // accelerator on device memory
  double bw_device_remote = 474.0;    // accelerator on host memory
  double bw_host_device_mem = 142.0;  // CPU on device memory

  double page_migration_latency = 5e-5;  // per contiguous page run
  double copy_latency = 6e-4;            // per copy, includes device allocation

  double peak_flops_device = 67e12;
  double kernel_efficiency = 0.82;
  double peak_flops_host = 7.14e12;
  double host_kernel_efficiency = 0.88;

  // Fraction of the streaming bandwidth a BLAS kernel sustains.
  double device_local_efficiency = 0.77;
  double device_remote_efficiency = 0.36;
  double host_memory_efficiency = 0.80;

  // Device kernels on unaligned system-allocated memory run this much slower.
  double unaligned_penalty = 1.4;

  // Output tile edge; inputs that do not stay cached are re-read once per
  // tile along their broadcast dimension.
  std::int64_t device_tile = 128;
  // Device-local operands up to this size are read from memory once.
  // Remote lines are not retained across tiles.
  std::uint64_t device_cache_bytes = 50ull << 20;

  bool valid() const noexcept;
  friend bool operator==(const CostModel&, const CostModel&) = default;
};

struct KernelPlacement {
  MemoryDomain kernel_domain = MemoryDomain::kDevice;
  std::vector<MemoryDomain> operand_domains;
  // Operands live in the caller's malloc'd buffers (as opposed to
  // dedicated device allocations).
  bool system_allocated = true;
  std::uint64_t page_size = 65536;
};

KernelPlacement placement_for(const MovementPlan& plan, std::uint64_t page_size);

double kernel_flop_time(const BlasCall& call, MemoryDomain kernel_domain, const CostModel& model) noexcept;
double kernel_memory_time(const BlasCall& call, const KernelPlacement& placement, const CostModel& model);
double kernel_time(const BlasCall& call, const KernelPlacement& placement, const CostModel& model);

double movement_time(const MovementPlan& plan, const CostModel& model) noexcept;

// Shipped calibration: cost model plus counter-emulator constants.
struct Calibration {
  int version = 1;
  CostModel model;
  CounterEmulatorConfig counter;

  friend bool operator==(const Calibration&, const Calibration&) = default;
};

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string calibration_to_json(const Calibration& cal);
Calibration calibration_from_json(const std::string& text);
Calibration load_calibration(const std::filesystem::path& path);

}  // namespace scilib
