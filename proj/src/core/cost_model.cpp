// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0

#include "scilib/cost_model.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"

namespace scilib {

namespace {

constexpr double kGiga = 1e9;

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

// Output dimension along which each input operand is broadcast; 0 marks the
// output operand.
std::vector<std::int64_t> broadcast_dims(const BlasCall& call) {
  const bool left = call.side == Side::kLeft;
  switch (call.routine.family) {
    case Family::kGemm: return {call.n, call.m, 0};
    case Family::kSymm:
    case Family::kHemm: return left ? std::vector<std::int64_t>{call.n, call.m, 0}
                                    : std::vector<std::int64_t>{call.m, call.n, 0};
    case Family::kSyrk:
    case Family::kHerk: return {call.n, 0};
    case Family::kSyr2k:
    case Family::kHer2k: return {call.n, call.n, 0};
    case Family::kTrmm:
    case Family::kTrsm: return {left ? call.n : call.m, 0};
  }
  return {};
}

bool any_unaligned(const BlasCall& call, std::uint64_t page_size) {
  return std::any_of(call.operands.begin(), call.operands.end(),
                     [&](const OperandSpan& op) { return op.base % page_size != 0; });
}

}  // namespace

bool CostModel::valid() const noexcept {
  const double positives[] = {bw_h2d, bw_d2h, bw_host_local, bw_device_local, bw_device_remote, bw_host_device_mem,
                              peak_flops_device, peak_flops_host};
  for (double v : positives) {
    if (!(v > 0)) return false;
  }
  const double fractions[] = {kernel_efficiency, host_kernel_efficiency, device_local_efficiency,
                              device_remote_efficiency, host_memory_efficiency};
  for (double v : fractions) {
    if (!(v > 0 && v <= 1)) return false;
  }
  return unaligned_penalty >= 1 && page_migration_latency >= 0 && copy_latency >= 0 && device_tile >= 1;
}

KernelPlacement placement_for(const MovementPlan& plan, std::uint64_t page_size) {
  return {plan.kernel_domain, plan.operand_domains, !plan.device_allocations, page_size};
}

double kernel_flop_time(const BlasCall& call, MemoryDomain kernel_domain, const CostModel& model) noexcept {
  const double rate = kernel_domain == MemoryDomain::kDevice ? model.peak_flops_device * model.kernel_efficiency
                                                             : model.peak_flops_host * model.host_kernel_efficiency;
  return flops(call) / rate;
}

double kernel_memory_time(const BlasCall& call, const KernelPlacement& placement, const CostModel& model) {
  const auto dims = broadcast_dims(call);
  double seconds = 0.0;
  for (std::size_t i = 0; i < call.operands.size(); ++i) {
    const OperandSpan& op = call.operands[i];
    const auto bytes = static_cast<double>(operand_bytes(op));
    const MemoryDomain where =
        i < placement.operand_domains.size() ? placement.operand_domains[i] : MemoryDomain::kHost;
    const bool output = op.role != OperandRole::kInput;
    if (placement.kernel_domain == MemoryDomain::kHost) {
      const double bw = where == MemoryDomain::kHost ? model.bw_host_local : model.bw_host_device_mem;
      seconds += (output ? 2.0 : 1.0) * bytes / (bw * model.host_memory_efficiency * kGiga);
      continue;
    }
    const bool local = where == MemoryDomain::kDevice;
    double rereads = 2.0;
    if (!output) {
      const bool cached = local && operand_bytes(op) <= model.device_cache_bytes;
      rereads = cached ? 1.0 : static_cast<double>(ceil_div(dims[i], model.device_tile));
    }
    const double bw = local ? model.bw_device_local * model.device_local_efficiency
                            : model.bw_device_remote * model.device_remote_efficiency;
    seconds += rereads * bytes / (bw * kGiga);
  }
  return seconds;
}

double kernel_time(const BlasCall& call, const KernelPlacement& placement, const CostModel& model) {
  double t = std::max(kernel_flop_time(call, placement.kernel_domain, model),
                      kernel_memory_time(call, placement, model));
  if (placement.kernel_domain == MemoryDomain::kDevice && placement.system_allocated &&
      any_unaligned(call, placement.page_size)) {
    t *= model.unaligned_penalty;
  }
  return t;
}

double movement_time(const MovementPlan& plan, const CostModel& model) noexcept {
  double seconds = 0.0;
  for (const auto& a : plan.actions) {
    if (a.bytes == 0) continue;
    const auto bytes = static_cast<double>(a.bytes);
    switch (a.kind) {
      case ActionKind::kCopyH2D:
        seconds += bytes / (model.bw_h2d * kGiga) + model.copy_latency;
        break;
      case ActionKind::kCopyD2H:
        seconds += bytes / (model.bw_d2h * kGiga) + model.copy_latency;
        break;
      case ActionKind::kMigrateH2D:
        seconds += bytes / (model.bw_h2d * kGiga) +
                   static_cast<double>(std::max<std::size_t>(a.runs.size(), 1)) * model.page_migration_latency;
        break;
    }
  }
  return seconds;
}

// ---------------------------------------------------------------------------
// Calibration file

namespace {

using nlohmann::ordered_json;

#define SCILIB_MODEL_FIELDS(X)                                                                                  \
  X(bw_h2d) X(bw_d2h) X(bw_host_local) X(bw_device_local) X(bw_device_remote) X(bw_host_device_mem)            \
  X(page_migration_latency) X(copy_latency) X(peak_flops_device) X(kernel_efficiency) X(peak_flops_host)      \
  X(host_kernel_efficiency) X(device_local_efficiency) X(device_remote_efficiency) X(host_memory_efficiency)  \
  X(unaligned_penalty) X(device_tile) X(device_cache_bytes)

#define SCILIB_COUNTER_FIELDS(X) X(migration_cost_per_byte) X(remote_penalty_per_byte) X(window_floor)

using Setters = std::vector<std::pair<std::string, std::function<void(const ordered_json&)>>>;

void read_fields(const ordered_json& obj, const char* section, const Setters& setters) {
  if (!obj.is_object()) throw CalibrationError(std::string("section '") + section + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    auto it = std::find_if(setters.begin(), setters.end(), [&](const auto& s) { return s.first == key; });
    if (it == setters.end()) throw CalibrationError(std::string("unknown key '") + key + "' in '" + section + "'");
    if (!value.is_number()) throw CalibrationError(std::string("key '") + key + "' must be a number");
    it->second(value);
  }
}

}  // namespace

std::string calibration_to_json(const Calibration& cal) {
  ordered_json doc;
  doc["version"] = cal.version;
  ordered_json model;
#define X(f) model[#f] = cal.model.f;
  SCILIB_MODEL_FIELDS(X)
#undef X
  ordered_json counter;
#define X(f) counter[#f] = cal.counter.f;
  SCILIB_COUNTER_FIELDS(X)
#undef X
  doc["cost_model"] = std::move(model);
  doc["counter_emulator"] = std::move(counter);
  return doc.dump(2) + "\n";
}

Calibration calibration_from_json(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw CalibrationError(std::string("calibration is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw CalibrationError("calibration must be a JSON object");
  Calibration cal;
  for (const auto& [key, value] : doc.items()) {
    if (key == "version") {
      if (!value.is_number_integer()) throw CalibrationError("'version' must be an integer");
      cal.version = value.get<int>();
    } else if (key == "cost_model") {
      Setters setters;
#define X(f) setters.emplace_back(#f, [&cal](const ordered_json& v) { v.get_to(cal.model.f); });
      SCILIB_MODEL_FIELDS(X)
#undef X
      read_fields(value, "cost_model", setters);
    } else if (key == "counter_emulator") {
      Setters setters;
#define X(f) setters.emplace_back(#f, [&cal](const ordered_json& v) { v.get_to(cal.counter.f); });
      SCILIB_COUNTER_FIELDS(X)
#undef X
      read_fields(value, "counter_emulator", setters);
    } else {
      throw CalibrationError("unknown top-level key '" + key + "'");
    }
  }
  if (cal.version != 1) throw CalibrationError("unsupported calibration version " + std::to_string(cal.version));
  if (!cal.model.valid()) throw CalibrationError("cost model parameters out of range");
  if (!cal.counter.valid()) throw CalibrationError("counter emulator parameters out of range");
  return cal;
}

Calibration load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CalibrationError("cannot open calibration file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return calibration_from_json(buf.str());
}

}  // namespace scilib
