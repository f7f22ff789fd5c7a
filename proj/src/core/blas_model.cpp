// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0

#include "scilib/blas_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace scilib {

namespace {

bool is_hermitian(Family f) {
  return f == Family::kHemm || f == Family::kHerk || f == Family::kHer2k;
}

constexpr std::string_view family_suffix(Family f) {
  switch (f) {
    case Family::kGemm: return "gemm";
    case Family::kSymm: return "symm";
    case Family::kHemm: return "hemm";
    case Family::kSyrk: return "syrk";
    case Family::kHerk: return "herk";
    case Family::kSyr2k: return "syr2k";
    case Family::kHer2k: return "her2k";
    case Family::kTrmm: return "trmm";
    case Family::kTrsm: return "trsm";
  }
  return "";
}

constexpr Family kFamilies[] = {Family::kGemm, Family::kSymm, Family::kHemm,
                                Family::kSyrk, Family::kHerk, Family::kSyr2k,
                                Family::kHer2k, Family::kTrmm, Family::kTrsm};

bool rank_k_family(Family f) {
  return f == Family::kSyrk || f == Family::kHerk || f == Family::kSyr2k || f == Family::kHer2k;
}

// Cube root of a product of positive dimensions. Perfect cubes come back
// exact so that threshold comparisons at integer boundaries are stable.
double exact_cbrt(std::int64_t a, std::int64_t b, std::int64_t c) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * static_cast<unsigned __int128>(b) *
                              static_cast<unsigned __int128>(c);
  const long double approx =
      std::cbrt(static_cast<long double>(a) * static_cast<long double>(b) * static_cast<long double>(c));
  const auto nearest = static_cast<unsigned __int128>(std::llround(approx));
  if (nearest * nearest * nearest == p) return static_cast<double>(nearest);
  return static_cast<double>(approx);
}

}  // namespace

bool Routine::valid() const noexcept {
  return !is_hermitian(family) || is_complex();
}

std::size_t Routine::elem_bytes() const noexcept {
  switch (precision) {
    case Precision::kS: return 4;
    case Precision::kD: return 8;
    case Precision::kC: return 8;
    case Precision::kZ: return 16;
  }
  return 0;
}

std::string Routine::name() const {
  std::string out(1, static_cast<char>(std::tolower(to_char(precision))));
  out += family_suffix(family);
  return out;
}

std::optional<Routine> parse_routine(std::string_view name) {
  if (!name.empty() && name.back() == '_') name.remove_suffix(1);
  if (name.size() < 5) return std::nullopt;
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  Routine r;
  switch (lower[0]) {
    case 's': r.precision = Precision::kS; break;
    case 'd': r.precision = Precision::kD; break;
    case 'c': r.precision = Precision::kC; break;
    case 'z': r.precision = Precision::kZ; break;
    default: return std::nullopt;
  }
  const std::string_view rest = std::string_view(lower).substr(1);
  for (Family f : kFamilies) {
    if (rest == family_suffix(f)) {
      r.family = f;
      if (!r.valid()) return std::nullopt;
      return r;
    }
  }
  return std::nullopt;
}

const std::vector<Routine>& all_routines() {
  static const std::vector<Routine> routines = [] {
    std::vector<Routine> out;
    for (Family f : kFamilies) {
      for (Precision p : {Precision::kS, Precision::kD, Precision::kC, Precision::kZ}) {
        Routine r{f, p};
        if (r.valid()) out.push_back(r);
      }
    }
    return out;
  }();
  return routines;
}

bool OperandSpan::well_formed() const noexcept {
  if (rows < 1 || cols < 1 || ld < rows || elem_bytes == 0) return false;
  const auto bytes = static_cast<unsigned __int128>((cols - 1)) * static_cast<unsigned __int128>(ld) +
                     static_cast<unsigned __int128>(rows);
  const unsigned __int128 extent = bytes * elem_bytes;
  return static_cast<unsigned __int128>(base) + extent <=
         static_cast<unsigned __int128>(std::numeric_limits<std::uint64_t>::max());
}

std::uint64_t operand_bytes(const OperandSpan& span) noexcept {
  const auto elems = static_cast<std::uint64_t>(span.cols - 1) * static_cast<std::uint64_t>(span.ld) +
                     static_cast<std::uint64_t>(span.rows);
  return elems * span.elem_bytes;
}

bool family_uses_k(Family f) noexcept {
  return f == Family::kGemm || rank_k_family(f);
}

bool family_has_side(Family f) noexcept {
  return f == Family::kSymm || f == Family::kHemm || f == Family::kTrmm || f == Family::kTrsm;
}

std::size_t operand_count(Family f) noexcept {
  switch (f) {
    case Family::kSyrk:
    case Family::kHerk:
    case Family::kTrmm:
    case Family::kTrsm:
      return 2;
    default:
      return 3;
  }
}

std::vector<std::pair<std::int64_t, std::int64_t>> stored_extents(const CallShape& s) {
  const Family f = s.routine.family;
  const bool a_plain = s.trans_a == Trans::kN;
  const bool b_plain = s.trans_b == Trans::kN;
  const std::int64_t tri = s.side == Side::kLeft ? s.m : s.n;
  switch (f) {
    case Family::kGemm:
      return {a_plain ? std::pair{s.m, s.k} : std::pair{s.k, s.m},
              b_plain ? std::pair{s.k, s.n} : std::pair{s.n, s.k},
              {s.m, s.n}};
    case Family::kSymm:
    case Family::kHemm:
      return {{tri, tri}, {s.m, s.n}, {s.m, s.n}};
    case Family::kSyrk:
    case Family::kHerk:
      return {a_plain ? std::pair{s.n, s.k} : std::pair{s.k, s.n}, {s.n, s.n}};
    case Family::kSyr2k:
    case Family::kHer2k: {
      const auto ab = a_plain ? std::pair{s.n, s.k} : std::pair{s.k, s.n};
      return {ab, ab, {s.n, s.n}};
    }
    case Family::kTrmm:
    case Family::kTrsm:
      return {{tri, tri}, {s.m, s.n}};
  }
  return {};
}

BlasCall make_call(const CallShape& shape, const std::vector<std::uint64_t>& bases) {
  BlasCall call;
  call.routine = shape.routine;
  call.trans_a = shape.trans_a;
  call.trans_b = shape.trans_b;
  call.side = shape.side;
  call.uplo = shape.uplo;
  call.n = shape.n;
  call.m = rank_k_family(shape.routine.family) ? shape.n : shape.m;
  call.k = family_uses_k(shape.routine.family) ? shape.k : kNoK;
  call.alpha = shape.alpha;
  call.beta = shape.beta;

  CallShape s = shape;
  s.m = call.m;
  const auto extents = stored_extents(s);
  if (bases.size() != extents.size()) {
    throw InvalidCall(shape.routine.name() + ": expected " + std::to_string(extents.size()) +
                      " operand bases, got " + std::to_string(bases.size()));
  }
  const std::int64_t lds[3] = {shape.lda, shape.ldb, shape.ldc};
  const bool triangular = shape.routine.family == Family::kTrmm || shape.routine.family == Family::kTrsm;
  for (std::size_t i = 0; i < extents.size(); ++i) {
    OperandSpan span;
    span.base = bases[i];
    span.rows = extents[i].first;
    span.cols = extents[i].second;
    // Two-operand routines pass their second matrix through ldb (trmm/trsm)
    // or ldc (syrk/herk).
    std::int64_t ld = lds[i];
    if (extents.size() == 2 && i == 1) ld = triangular ? shape.ldb : shape.ldc;
    span.ld = ld == 0 ? span.rows : ld;
    span.elem_bytes = static_cast<std::uint32_t>(shape.routine.elem_bytes());
    const bool last = i + 1 == extents.size();
    if (!last) {
      span.role = OperandRole::kInput;
    } else if (triangular) {
      span.role = OperandRole::kInOut;
    } else {
      span.role = shape.beta == std::complex<double>{0.0, 0.0} ? OperandRole::kOutput : OperandRole::kInOut;
    }
    call.operands.push_back(span);
  }
  return call;
}

void validate(const BlasCall& call) {
  const Family f = call.routine.family;
  const std::string name = call.routine.name();
  if (!call.routine.valid()) throw InvalidCall(name + ": Hermitian routines require a complex precision");
  if (call.m < 1) throw InvalidCall(name + ": m must be >= 1");
  if (call.n < 1) throw InvalidCall(name + ": n must be >= 1");
  if (family_uses_k(f) && call.k < 1) throw InvalidCall(name + ": k must be >= 1");
  if (!family_uses_k(f) && call.k != kNoK) throw InvalidCall(name + ": k is not used by this routine");
  if (rank_k_family(f) && call.m != call.n) throw InvalidCall(name + ": C is n x n, m must equal n");
  if (call.operands.size() != operand_count(f)) {
    throw InvalidCall(name + ": expected " + std::to_string(operand_count(f)) + " operands, got " +
                      std::to_string(call.operands.size()));
  }
  CallShape shape;
  shape.routine = call.routine;
  shape.trans_a = call.trans_a;
  shape.trans_b = call.trans_b;
  shape.side = call.side;
  shape.m = call.m;
  shape.n = call.n;
  shape.k = call.k;
  const auto extents = stored_extents(shape);
  static constexpr const char* kLabels[] = {"A", "B", "C"};
  for (std::size_t i = 0; i < call.operands.size(); ++i) {
    const OperandSpan& op = call.operands[i];
    const char* label = call.operands.size() == 2 && i == 1
                            ? (f == Family::kTrmm || f == Family::kTrsm ? "B" : "C")
                            : kLabels[i];
    if (op.rows != extents[i].first || op.cols != extents[i].second) {
      throw InvalidCall(name + ": operand " + label + " extent " + std::to_string(op.rows) + "x" +
                        std::to_string(op.cols) + " does not match " + std::to_string(extents[i].first) +
                        "x" + std::to_string(extents[i].second));
    }
    if (op.ld < op.rows) throw InvalidCall(name + ": leading dimension of " + label + " is smaller than its rows");
    if (op.elem_bytes != call.routine.elem_bytes()) {
      throw InvalidCall(name + ": element size of " + label + " does not match the precision");
    }
    if (!op.well_formed()) throw InvalidCall(name + ": operand " + label + " overflows the address space");
  }
}

bool is_well_formed(const BlasCall& call) noexcept {
  try {
    validate(call);
    return true;
  } catch (const InvalidCall&) {
    return false;
  }
}

double navg(const BlasCall& call) noexcept {
  const std::int64_t m = call.m, n = call.n, k = call.k;
  switch (call.routine.family) {
    case Family::kGemm:
      return exact_cbrt(m, n, k);
    case Family::kSymm:
    case Family::kHemm:
    case Family::kTrmm:
    case Family::kTrsm:
      return call.side == Side::kLeft ? exact_cbrt(m, m, n) : exact_cbrt(m, n, n);
    case Family::kSyrk:
    case Family::kHerk:
    case Family::kSyr2k:
    case Family::kHer2k:
      return exact_cbrt(n, n, k);
  }
  return 0.0;
}

bool should_offload(const BlasCall& call, double threshold) noexcept {
  return navg(call) > threshold;
}

double flops(const BlasCall& call) noexcept {
  const auto m = static_cast<double>(call.m);
  const auto n = static_cast<double>(call.n);
  const auto k = static_cast<double>(call.k);
  double real = 0.0;
  switch (call.routine.family) {
    case Family::kGemm: real = 2.0 * m * n * k; break;
    case Family::kSymm:
    case Family::kHemm: real = call.side == Side::kLeft ? 2.0 * m * m * n : 2.0 * m * n * n; break;
    case Family::kSyrk:
    case Family::kHerk: real = n * n * k; break;
    case Family::kSyr2k:
    case Family::kHer2k: real = 2.0 * n * n * k; break;
    case Family::kTrmm:
    case Family::kTrsm: real = call.side == Side::kLeft ? m * m * n : m * n * n; break;
  }
  return call.routine.is_complex() ? 4.0 * real : real;
}

char to_char(Trans t) noexcept {
  switch (t) {
    case Trans::kN: return 'N';
    case Trans::kT: return 'T';
    case Trans::kC: return 'C';
  }
  return '?';
}
char to_char(Side s) noexcept { return s == Side::kLeft ? 'L' : 'R'; }
char to_char(Uplo u) noexcept { return u == Uplo::kUpper ? 'U' : 'L'; }
char to_char(Precision p) noexcept {
  switch (p) {
    case Precision::kS: return 'S';
    case Precision::kD: return 'D';
    case Precision::kC: return 'C';
    case Precision::kZ: return 'Z';
  }
  return '?';
}

std::optional<Trans> parse_trans(char c) noexcept {
  switch (std::toupper(static_cast<unsigned char>(c))) {
    case 'N': return Trans::kN;
    case 'T': return Trans::kT;
    case 'C': return Trans::kC;
    default: return std::nullopt;
  }
}
std::optional<Side> parse_side(char c) noexcept {
  switch (std::toupper(static_cast<unsigned char>(c))) {
    case 'L': return Side::kLeft;
    case 'R': return Side::kRight;
    default: return std::nullopt;
  }
}
std::optional<Uplo> parse_uplo(char c) noexcept {
  switch (std::toupper(static_cast<unsigned char>(c))) {
    case 'U': return Uplo::kUpper;
    case 'L': return Uplo::kLower;
    default: return std::nullopt;
  }
}

std::string_view role_name(OperandRole r) noexcept {
  switch (r) {
    case OperandRole::kInput: return "in";
    case OperandRole::kOutput: return "out";
    case OperandRole::kInOut: return "inout";
  }
  return "?";
}

std::optional<OperandRole> parse_role(std::string_view s) noexcept {
  if (s == "in") return OperandRole::kInput;
  if (s == "out") return OperandRole::kOutput;
  if (s == "inout") return OperandRole::kInOut;
  return std::nullopt;
}

}  // namespace scilib
