// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0

#include "scilib/report.hpp"

#include <cinttypes>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace scilib {

using nlohmann::ordered_json;

std::string report_to_json_line(const PolicyReport& r) {
  ordered_json j;
  j["policy"] = std::string(policy_name(r.policy));
  j["total_time_s"] = r.total_time;
  j["blas_time_s"] = r.blas_time;
  j["data_movement_time_s"] = r.data_movement_time;
  j["movement_in_blas"] = r.movement_in_blas;
  j["host_time_s"] = r.host_time;
  j["bytes_moved"] = r.bytes_moved;
  j["calls_offloaded"] = r.calls_offloaded;
  j["calls_kept_on_cpu"] = r.calls_kept_on_cpu;
  j["mean_reuse"] = r.mean_reuse;
  ordered_json buffers = ordered_json::array();
  for (const auto& b : r.per_buffer_reuse) {
    char base[24];
    std::snprintf(base, sizeof base, "0x%" PRIx64, b.base);
    ordered_json e;
    e["base"] = base;
    e["bytes"] = b.bytes;
    e["reuse"] = b.reuse;
    e["device_resident"] = b.device_resident;
    buffers.push_back(std::move(e));
  }
  j["buffers"] = std::move(buffers);
  return j.dump();
}

PolicyReport report_from_json_line(const std::string& line) {
  const auto j = ordered_json::parse(line);
  PolicyReport r;
  const auto policy = parse_policy(j.at("policy").get<std::string>());
  if (!policy) throw std::runtime_error("unknown policy '" + j.at("policy").get<std::string>() + "'");
  r.policy = *policy;
  r.total_time = j.at("total_time_s").get<double>();
  r.blas_time = j.at("blas_time_s").get<double>();
  r.data_movement_time = j.at("data_movement_time_s").get<double>();
  r.movement_in_blas = j.at("movement_in_blas").get<bool>();
  r.host_time = j.at("host_time_s").get<double>();
  r.bytes_moved = j.at("bytes_moved").get<std::uint64_t>();
  r.calls_offloaded = j.at("calls_offloaded").get<std::uint64_t>();
  r.calls_kept_on_cpu = j.at("calls_kept_on_cpu").get<std::uint64_t>();
  r.mean_reuse = j.at("mean_reuse").get<double>();
  for (const auto& e : j.at("buffers")) {
    BufferReuse b;
    b.base = std::stoull(e.at("base").get<std::string>(), nullptr, 16);
    b.bytes = e.at("bytes").get<std::uint64_t>();
    b.reuse = e.at("reuse").get<std::uint64_t>();
    b.device_resident = e.at("device_resident").get<bool>();
    r.per_buffer_reuse.push_back(b);
  }
  return r;
}

void write_reports(std::ostream& out, const std::vector<PolicyReport>& reports) {
  for (const auto& r : reports) out << report_to_json_line(r) << '\n';
}

std::vector<PolicyReport> read_reports(std::istream& in) {
  std::vector<PolicyReport> reports;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      reports.push_back(report_from_json_line(line));
    } catch (const std::exception& e) {
      throw std::runtime_error("report line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return reports;
}

std::size_t fastest(const std::vector<PolicyReport>& reports) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].total_time < reports[best].total_time) best = i;
  }
  return best;
}

namespace {

std::string format_bytes(std::uint64_t bytes) {
  char buf[32];
  if (bytes >= 1000000000ULL) {
    std::snprintf(buf, sizeof buf, "%.2f GB", static_cast<double>(bytes) / 1e9);
  } else if (bytes >= 1000000ULL) {
    std::snprintf(buf, sizeof buf, "%.2f MB", static_cast<double>(bytes) / 1e6);
  } else {
    std::snprintf(buf, sizeof buf, "%" PRIu64 " B", bytes);
  }
  return buf;
}

}  // namespace

std::string render_table(const std::vector<PolicyReport>& reports, bool mark_fastest) {
  std::string out;
  char row[320];
  std::snprintf(row, sizeof row, "  %-10s %12s %12s %18s %10s %12s %10s %8s %10s %8s\n", "policy", "total (s)",
                "BLAS (s)", "data movement (s)", "movement", "moved", "offloaded", "on CPU", "mean reuse", "speedup");
  out += row;
  const std::size_t best = reports.empty() ? 0 : fastest(reports);
  double baseline = 0.0;
  for (const auto& r : reports) {
    if (r.policy == Policy::kCpuOnly) baseline = r.total_time;
  }
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    char movement[32];
    char share[16];
    if (r.movement_in_blas) {
      std::snprintf(movement, sizeof movement, "in BLAS");
      std::snprintf(share, sizeof share, "-");
    } else {
      std::snprintf(movement, sizeof movement, "%.4f", r.data_movement_time);
      const double pct = r.total_time > 0 ? 100.0 * r.data_movement_time / r.total_time : 0.0;
      std::snprintf(share, sizeof share, "%.1f%%", pct);
    }
    char speedup[16] = "-";
    if (baseline > 0 && r.total_time > 0) std::snprintf(speedup, sizeof speedup, "%.2fx", baseline / r.total_time);
    const char mark = mark_fastest && i == best ? '*' : ' ';
    std::snprintf(row, sizeof row, "%c %-10s %12.4f %12.4f %18s %10s %12s %10" PRIu64 " %8" PRIu64 " %10.1f %8s\n",
                  mark, std::string(policy_name(r.policy)).c_str(), r.total_time, r.blas_time, movement, share,
                  format_bytes(r.bytes_moved).c_str(), r.calls_offloaded, r.calls_kept_on_cpu, r.mean_reuse,
                  speedup);
    out += row;
  }
  return out;
}

}  // namespace scilib
