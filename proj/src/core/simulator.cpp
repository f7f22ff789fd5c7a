// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0

#include "scilib/simulator.hpp"

#include <future>
#include <map>
#include <utility>

namespace scilib {

SimulationError::SimulationError(std::uint64_t seq, const std::string& what)
    : std::runtime_error("event " + std::to_string(seq) + ": " + what), seq_(seq) {}

namespace {

void check_trace(const std::vector<TraceEvent>& trace) {
  if (trace.empty()) throw SimulationError(0, "empty trace");
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (i > 0 && trace[i].seq <= trace[i - 1].seq) throw SimulationError(trace[i].seq, "seq is not strictly increasing");
    try {
      validate(trace[i].call);
    } catch (const InvalidCall& e) {
      throw SimulationError(trace[i].seq, e.what());
    }
  }
}

using BufferKey = std::pair<std::uint64_t, std::uint64_t>;

}  // namespace

PolicyReport simulate(const std::vector<TraceEvent>& trace, Policy policy, const SimulationOptions& options) {
  check_trace(trace);
  if (!supported_page_size(options.page_size)) {
    throw SimulationError(trace.front().seq, "unsupported page size " + std::to_string(options.page_size));
  }

  PolicyReport report;
  report.policy = policy;
  report.movement_in_blas = policy == Policy::kCounter;

  ResidencyMap map(options.page_size, options.capacity_bytes);
  std::map<BufferKey, std::uint64_t> reuse;
  const bool stateful = policy == Policy::kCounter || policy == Policy::kFirstUse;

  for (const TraceEvent& ev : trace) {
    const BlasCall& call = ev.call;
    report.host_time += static_cast<double>(ev.host_ns) * 1e-9;

    const bool offload = policy != Policy::kCpuOnly && should_offload(call, options.threshold);
    MovementPlan plan;
    try {
      if (!offload) {
        plan = record_cpu_execution(call, map);
      } else if (policy == Policy::kMemCopy) {
        plan = plan_memcopy(call);
        std::uint64_t transient = 0;
        for (const auto& op : call.operands) transient += operand_bytes(op);
        if (options.capacity_bytes != 0 && transient > options.capacity_bytes) {
          throw CapacityExceeded(transient, options.capacity_bytes);
        }
      } else if (policy == Policy::kFirstUse) {
        plan = plan_first_use(call, map, ev.seq + 1);
      } else {
        plan = plan_counter_emulated(call, map, options.counter, ev.seq + 1);
      }
    } catch (const CapacityExceeded& e) {
      throw SimulationError(ev.seq, e.what());
    }

    const double kernel = kernel_time(call, placement_for(plan, options.page_size), options.model);
    const double movement = movement_time(plan, options.model);
    report.blas_time += kernel;
    if (report.movement_in_blas) {
      report.blas_time += movement;
    } else {
      report.data_movement_time += movement;
    }
    report.bytes_moved += plan.bytes_moved();

    if (!offload) {
      ++report.calls_kept_on_cpu;
      continue;
    }
    ++report.calls_offloaded;
    for (std::size_t i = 0; i < call.operands.size(); ++i) {
      auto& count = reuse[{call.operands[i].base, operand_bytes(call.operands[i])}];
      if (stateful && plan.operand_reused[i]) ++count;
    }
  }

  report.total_time = report.host_time + report.blas_time + report.data_movement_time;

  double reuse_sum = 0.0;
  std::uint64_t resident = 0;
  for (const auto& [key, count] : reuse) {
    BufferReuse b{key.first, key.second, count, false};
    if (stateful) {
      OperandSpan span;
      span.base = key.first;
      span.rows = static_cast<std::int64_t>(key.second);
      span.cols = 1;
      span.ld = span.rows;
      span.elem_bytes = 1;
      b.device_resident = map.all_device(pages_of(span, options.page_size));
    }
    if (b.device_resident) {
      reuse_sum += static_cast<double>(count);
      ++resident;
    }
    report.per_buffer_reuse.push_back(b);
  }
  report.mean_reuse = resident > 0 ? reuse_sum / static_cast<double>(resident) : 0.0;
  return report;
}

std::vector<PolicyReport> compare(const std::vector<TraceEvent>& trace, const SimulationOptions& options) {
  check_trace(trace);
  std::vector<std::future<PolicyReport>> jobs;
  for (Policy p : kAllPolicies) {
    jobs.push_back(std::async(std::launch::async, [&trace, &options, p] { return simulate(trace, p, options); }));
  }
  std::vector<PolicyReport> reports;
  for (auto& j : jobs) reports.push_back(j.get());
  return reports;
}

}  // namespace scilib
