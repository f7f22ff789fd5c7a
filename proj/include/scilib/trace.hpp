// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Line-delimited JSON trace records shared by the interposer (writer) and
// the simulator/CLI (reader). One object per line, fields in a fixed order:
//
//   seq routine precision transA transB side uplo m n k
//   alpha_re alpha_im beta_re beta_im operands thread decision
//   bytes_moved wall_ns host_ns
//
// operands is an array of {base (hex string), rows, cols, ld, elem_bytes,
// role ("in" | "out" | "inout")}. decision is "cpu", "offload" or null,
// wall_ns is null for synthetic traces. host_ns is the time the calling
// thread spent outside BLAS since its previous intercepted call.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scilib/blas_model.hpp"

namespace scilib {

enum class Decision : std::uint8_t { kCpu, kOffload };

struct TraceEvent {
  std::uint64_t seq = 0;
  BlasCall call;
  std::optional<Decision> decision;
  std::uint64_t bytes_moved = 0;
  std::optional<std::uint64_t> wall_ns;
  std::uint64_t host_ns = 0;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

std::string to_json_line(const TraceEvent& event);
// Parses one record; `line_no` is only used for error messages.
TraceEvent parse_trace_line(std::string_view line, std::size_t line_no = 0);

// Blank lines are skipped. Throws TraceParseError on the first bad line.
std::vector<TraceEvent> read_trace(std::istream& in);
std::vector<TraceEvent> read_trace_file(const std::filesystem::path& path);
void write_trace(std::ostream& out, const std::vector<TraceEvent>& events);

}  // namespace scilib
