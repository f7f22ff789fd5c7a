// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic trace replay under one data-movement policy.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "scilib/cost_model.hpp"
#include "scilib/policy.hpp"
#include "scilib/trace.hpp"

namespace scilib {

struct SimulationOptions {
  double threshold = kDefaultThreshold;
  std::uint64_t page_size = 65536;
  std::uint64_t capacity_bytes = 0;  // 0: unbounded
  CostModel model;
  CounterEmulatorConfig counter;
};

struct BufferReuse {
  std::uint64_t base = 0;
  std::uint64_t bytes = 0;
  std::uint64_t reuse = 0;
  bool device_resident = false;

  friend bool operator==(const BufferReuse&, const BufferReuse&) = default;
};

struct PolicyReport {
  Policy policy = Policy::kCpuOnly;
  double total_time = 0.0;
  double blas_time = 0.0;
  double data_movement_time = 0.0;
  // Set for COUNTER: migration happens inside the kernels and its time is
  // part of blas_time.
  bool movement_in_blas = false;
  double host_time = 0.0;
  std::uint64_t bytes_moved = 0;
  std::uint64_t calls_offloaded = 0;
  std::uint64_t calls_kept_on_cpu = 0;
  // Sorted by (base, bytes).
  std::vector<BufferReuse> per_buffer_reuse;
  // Mean reuse over buffers that ended device-resident.
  double mean_reuse = 0.0;

  friend bool operator==(const PolicyReport&, const PolicyReport&) = default;
};

class SimulationError : public std::runtime_error {
 public:
  SimulationError(std::uint64_t seq, const std::string& what);
  std::uint64_t seq() const noexcept { return seq_; }

 private:
  std::uint64_t seq_;
};

// Throws SimulationError for an empty trace, non-increasing seq, a
// malformed call (whole trace rejected before replay) or device capacity
// overflow (naming the first overflowing event).
PolicyReport simulate(const std::vector<TraceEvent>& trace, Policy policy, const SimulationOptions& options);

// One report per policy in enum order, each on independent state.
std::vector<PolicyReport> compare(const std::vector<TraceEvent>& trace, const SimulationOptions& options);

}  // namespace scilib
