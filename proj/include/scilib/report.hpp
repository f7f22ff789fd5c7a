// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Rendering of PolicyReports: a fixed-width table for people and one JSON
// object per line for tools. Both are byte-stable for equal reports.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "scilib/simulator.hpp"

namespace scilib {

// Keys: policy total_time_s blas_time_s data_movement_time_s
// movement_in_blas host_time_s bytes_moved calls_offloaded
// calls_kept_on_cpu mean_reuse buffers. buffers holds
// {base, bytes, reuse, device_resident} entries.
std::string report_to_json_line(const PolicyReport& report);
PolicyReport report_from_json_line(const std::string& line);

void write_reports(std::ostream& out, const std::vector<PolicyReport>& reports);
// Throws std::runtime_error naming the line on malformed input.
std::vector<PolicyReport> read_reports(std::istream& in);

// Index of the report with the smallest total_time (first one on ties).
std::size_t fastest(const std::vector<PolicyReport>& reports);

// One row per report; the fastest is marked with '*' when `mark_fastest`.
std::string render_table(const std::vector<PolicyReport>& reports, bool mark_fastest);

}  // namespace scilib
