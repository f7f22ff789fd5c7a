// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic trace generators shaped like the iterative and skinny
// workloads the policies are compared on.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scilib/blas_model.hpp"
#include "scilib/trace.hpp"

namespace scilib {

enum class WorkloadPattern : std::uint8_t {
  // Fixed buffer sets, alternating near-square gemm sets and trsm sets,
  // each call issued once per iteration.
  kIterativeSquare,
  // One transposed skinny gemm C = A^T B repeated on the same buffers.
  kSkinnyScalapack,
  // Per set and iteration: C = A B, then E = D C.
  kBlockedChain,
};

std::string_view pattern_name(WorkloadPattern p) noexcept;
std::optional<WorkloadPattern> parse_pattern(std::string_view s) noexcept;

struct WorkloadRecipe {
  std::string name;
  WorkloadPattern pattern = WorkloadPattern::kIterativeSquare;
  std::int64_t m = 0;
  std::int64_t n = 0;
  std::int64_t k = 0;
  std::int64_t iterations = 1;
  std::int64_t buffer_count = 1;  // number of buffer sets
  Precision precision = Precision::kD;
  // Non-BLAS time the application spends before each call.
  double host_gap_s = 0.0;
  // Each set's dimensions are enlarged by a seeded amount in [0, jitter).
  std::int64_t jitter = 0;
};

class InvalidRecipe : public std::invalid_argument {
 public:
  InvalidRecipe(std::string field, const std::string& what);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Throws InvalidRecipe naming the first offending field.
void validate(const WorkloadRecipe& recipe);

// "must", "parsec" and "chain".
std::optional<WorkloadRecipe> named_recipe(std::string_view name);
std::vector<std::string> recipe_names();

inline constexpr std::uint64_t kSyntheticHeapBase = 0x7f0000000000ULL;

std::vector<TraceEvent> gen_trace(const WorkloadRecipe& recipe, std::uint64_t seed);

}  // namespace scilib
