// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0

#include "scilib/workload.hpp"

#include <cmath>
#include <random>

namespace scilib {

InvalidRecipe::InvalidRecipe(std::string field, const std::string& what)
    : std::invalid_argument("recipe field '" + field + "': " + what), field_(std::move(field)) {}

std::string_view pattern_name(WorkloadPattern p) noexcept {
  switch (p) {
    case WorkloadPattern::kIterativeSquare: return "iterative_square";
    case WorkloadPattern::kSkinnyScalapack: return "skinny_scalapack";
    case WorkloadPattern::kBlockedChain: return "blocked_chain";
  }
  return "?";
}

std::optional<WorkloadPattern> parse_pattern(std::string_view s) noexcept {
  for (auto p : {WorkloadPattern::kIterativeSquare, WorkloadPattern::kSkinnyScalapack, WorkloadPattern::kBlockedChain}) {
    if (s == pattern_name(p)) return p;
  }
  return std::nullopt;
}

void validate(const WorkloadRecipe& r) {
  constexpr std::int64_t kMaxDim = 1 << 20;
  if (r.m < 1 || r.m > kMaxDim) throw InvalidRecipe("m", "must be in [1, 2^20]");
  if (r.n < 1 || r.n > kMaxDim) throw InvalidRecipe("n", "must be in [1, 2^20]");
  if (r.k < 1 || r.k > kMaxDim) throw InvalidRecipe("k", "must be in [1, 2^20]");
  if (r.iterations < 1) throw InvalidRecipe("iterations", "must be at least 1");
  if (r.buffer_count < 1) throw InvalidRecipe("buffer_count", "must be at least 1");
  if (!(r.host_gap_s >= 0.0) || !std::isfinite(r.host_gap_s)) {
    throw InvalidRecipe("host_gap_s", "must be finite and non-negative");
  }
  if (r.jitter < 0 || r.jitter > kMaxDim) throw InvalidRecipe("jitter", "must be in [0, 2^20]");
  if (r.iterations * r.buffer_count > 100'000'000) throw InvalidRecipe("iterations", "trace would be too long");
}

std::optional<WorkloadRecipe> named_recipe(std::string_view name) {
  WorkloadRecipe r;
  r.name = std::string(name);
  if (name == "must") {
    // Edge chosen so the gemm output exceeds what the counter emulator is
    // willing to migrate while the kernel stays memory-bound when it is
    // read remotely.
    r.pattern = WorkloadPattern::kIterativeSquare;
    r.m = r.n = r.k = 3040;
    r.jitter = 96;
    r.iterations = 781;
    r.buffer_count = 4;
    r.precision = Precision::kZ;
    r.host_gap_s = 8e-3;
  } else if (name == "parsec") {
    r.pattern = WorkloadPattern::kSkinnyScalapack;
    r.m = 32;
    r.n = 2400;
    r.k = 93536;
    r.iterations = 571;
    r.buffer_count = 1;
    r.precision = Precision::kD;
    r.host_gap_s = 4.3e-3;
  } else if (name == "chain") {
    r.pattern = WorkloadPattern::kBlockedChain;
    r.m = r.n = r.k = 2000;
    r.iterations = 10;
    r.buffer_count = 2;
    r.precision = Precision::kD;
    r.host_gap_s = 1e-3;
  } else {
    return std::nullopt;
  }
  return r;
}

std::vector<std::string> recipe_names() { return {"must", "parsec", "chain"}; }

namespace {

constexpr std::uint64_t kArena = 65536;
// glibc places the user pointer of an mmap'd chunk 16 bytes into the page.
constexpr std::uint64_t kMallocHeader = 16;

class Heap {
 public:
  explicit Heap(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t alloc(std::uint64_t bytes) {
    const std::uint64_t base = cursor_ + kMallocHeader;
    const std::uint64_t span = (bytes + kMallocHeader + kArena - 1) / kArena * kArena;
    cursor_ += span + (rng_() % 4) * kArena;
    return base;
  }

  std::int64_t jitter(std::int64_t bound) { return bound > 0 ? static_cast<std::int64_t>(rng_() % bound) : 0; }

 private:
  std::mt19937_64 rng_;
  std::uint64_t cursor_ = kSyntheticHeapBase;
};

std::uint64_t bytes_of(std::int64_t rows, std::int64_t cols, Precision p) {
  return static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols) *
         Routine{Family::kGemm, p}.elem_bytes();
}

struct CallTemplate {
  CallShape shape;
  std::vector<std::uint64_t> bases;
};

CallTemplate fresh_buffers(Heap& heap, const CallShape& shape) {
  CallTemplate t{shape, {}};
  for (auto [rows, cols] : stored_extents(shape)) {
    t.bases.push_back(heap.alloc(bytes_of(rows, cols, shape.routine.precision)));
  }
  return t;
}

std::vector<std::vector<CallTemplate>> build_sets(const WorkloadRecipe& r, Heap& heap) {
  std::vector<std::vector<CallTemplate>> sets;
  for (std::int64_t s = 0; s < r.buffer_count; ++s) {
    const std::int64_t m = r.m + heap.jitter(r.jitter);
    const std::int64_t n = r.n + heap.jitter(r.jitter);
    const std::int64_t k = r.k + heap.jitter(r.jitter);
    CallShape shape;
    shape.routine = {Family::kGemm, r.precision};
    shape.m = m;
    shape.n = n;
    shape.k = k;
    std::vector<CallTemplate> calls;
    switch (r.pattern) {
      case WorkloadPattern::kIterativeSquare:
        if (s % 2 == 1) {
          shape.routine.family = Family::kTrsm;
          shape.side = Side::kLeft;
          shape.uplo = Uplo::kUpper;
          shape.k = kNoK;
        }
        calls.push_back(fresh_buffers(heap, shape));
        break;
      case WorkloadPattern::kSkinnyScalapack:
        shape.trans_a = Trans::kT;
        calls.push_back(fresh_buffers(heap, shape));
        break;
      case WorkloadPattern::kBlockedChain: {
        // C (m x n) = A (m x k) B (k x n); E (m x n) = D (m x m) C.
        CallTemplate first = fresh_buffers(heap, shape);
        CallShape second = shape;
        second.k = m;
        const std::uint64_t d = heap.alloc(bytes_of(m, m, r.precision));
        const std::uint64_t e = heap.alloc(bytes_of(m, n, r.precision));
        CallTemplate next{second, {d, first.bases[2], e}};
        calls.push_back(std::move(first));
        calls.push_back(std::move(next));
        break;
      }
    }
    sets.push_back(std::move(calls));
  }
  return sets;
}

}  // namespace

std::vector<TraceEvent> gen_trace(const WorkloadRecipe& recipe, std::uint64_t seed) {
  validate(recipe);
  Heap heap(seed);
  const auto sets = build_sets(recipe, heap);
  std::vector<BlasCall> calls;
  for (const auto& set : sets) {
    for (const auto& t : set) calls.push_back(make_call(t.shape, t.bases));
  }

  const auto host_ns = static_cast<std::uint64_t>(std::llround(recipe.host_gap_s * 1e9));
  std::vector<TraceEvent> trace;
  trace.reserve(static_cast<std::size_t>(recipe.iterations) * calls.size());
  std::uint64_t seq = 0;
  for (std::int64_t it = 0; it < recipe.iterations; ++it) {
    for (const auto& c : calls) {
      TraceEvent e;
      e.seq = seq++;
      e.call = c;
      e.host_ns = host_ns;
      trace.push_back(std::move(e));
    }
  }
  return trace;
}

}  // namespace scilib
