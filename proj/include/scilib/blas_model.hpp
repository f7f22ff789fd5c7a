// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Level-3 BLAS call vocabulary: routines, operand geometry and the
// routine-dependent average dimension used to gate offload.

#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scilib {

enum class Family : std::uint8_t { kGemm, kSymm, kHemm, kSyrk, kHerk, kSyr2k, kHer2k, kTrmm, kTrsm };
enum class Precision : std::uint8_t { kS, kD, kC, kZ };

enum class Trans : std::uint8_t { kN, kT, kC };
enum class Side : std::uint8_t { kLeft, kRight };
enum class Uplo : std::uint8_t { kUpper, kLower };

enum class OperandRole : std::uint8_t { kInput, kOutput, kInOut };

inline constexpr double kDefaultThreshold = 500.0;

struct Routine {
  Family family = Family::kGemm;
  Precision precision = Precision::kD;

  bool valid() const noexcept;
  bool is_complex() const noexcept { return precision == Precision::kC || precision == Precision::kZ; }
  std::size_t elem_bytes() const noexcept;
  // Lower-case BLAS name, e.g. "zgemm".
  std::string name() const;

  friend bool operator==(const Routine&, const Routine&) = default;
};

// Parses "dgemm", "ZHERK", "sgemm_" ... Returns nullopt for anything that is
// not a level-3 routine or violates the Hermitian/complex pairing.
std::optional<Routine> parse_routine(std::string_view name);

// All valid level-3 routines in family-major order (30 routines).
const std::vector<Routine>& all_routines();

// One matrix operand as the kernel sees it in memory (column-major).
struct OperandSpan {
  std::uint64_t base = 0;
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::int64_t ld = 0;
  std::uint32_t elem_bytes = 8;
  OperandRole role = OperandRole::kInput;

  bool well_formed() const noexcept;

  friend bool operator==(const OperandSpan&, const OperandSpan&) = default;
};

// Bytes between the first and one-past-the-last accessed element.
std::uint64_t operand_bytes(const OperandSpan& span) noexcept;

// Sentinel in BlasCall::k for families whose signature has no k.
inline constexpr std::int64_t kNoK = 0;

struct BlasCall {
  Routine routine;
  Trans trans_a = Trans::kN;
  Trans trans_b = Trans::kN;
  Side side = Side::kLeft;
  Uplo uplo = Uplo::kUpper;
  // SYRK-like calls store n in m as well (C is n x n). k is kNoK for
  // SYMM/HEMM/TRMM/TRSM.
  std::int64_t m = 0;
  std::int64_t n = 0;
  std::int64_t k = kNoK;
  std::complex<double> alpha{1.0, 0.0};
  std::complex<double> beta{0.0, 0.0};
  std::vector<OperandSpan> operands;
  std::uint64_t thread = 0;

  friend bool operator==(const BlasCall&, const BlasCall&) = default;
};

class InvalidCall : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

bool family_uses_k(Family f) noexcept;
bool family_has_side(Family f) noexcept;
std::size_t operand_count(Family f) noexcept;

// Throws InvalidCall describing the first violated invariant.
void validate(const BlasCall& call);
bool is_well_formed(const BlasCall& call) noexcept;

// Builds a call with operand spans laid out by the column-major BLAS
// convention. lda/ldb/ldc of 0 mean "tight" (ld == stored rows). Operand
// bases are taken from `bases` in argument order (A, B, C / A, C / A, B).
struct CallShape {
  Routine routine;
  Trans trans_a = Trans::kN;
  Trans trans_b = Trans::kN;
  Side side = Side::kLeft;
  Uplo uplo = Uplo::kUpper;
  std::int64_t m = 0;
  std::int64_t n = 0;
  std::int64_t k = kNoK;
  std::int64_t lda = 0;
  std::int64_t ldb = 0;
  std::int64_t ldc = 0;
  std::complex<double> alpha{1.0, 0.0};
  std::complex<double> beta{0.0, 0.0};
};
BlasCall make_call(const CallShape& shape, const std::vector<std::uint64_t>& bases);

// Stored extent (rows, cols) of each operand, in argument order.
std::vector<std::pair<std::int64_t, std::int64_t>> stored_extents(const CallShape& shape);

// Routine-dependent geometric-mean dimension.
double navg(const BlasCall& call) noexcept;
bool should_offload(const BlasCall& call, double threshold = kDefaultThreshold) noexcept;

// Real floating-point operations (complex multiply-adds count as 4).
double flops(const BlasCall& call) noexcept;

char to_char(Trans t) noexcept;
char to_char(Side s) noexcept;
char to_char(Uplo u) noexcept;
char to_char(Precision p) noexcept;
std::optional<Trans> parse_trans(char c) noexcept;
std::optional<Side> parse_side(char c) noexcept;
std::optional<Uplo> parse_uplo(char c) noexcept;
std::string_view role_name(OperandRole r) noexcept;
std::optional<OperandRole> parse_role(std::string_view s) noexcept;

}  // namespace scilib
