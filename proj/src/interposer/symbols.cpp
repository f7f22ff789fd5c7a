// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Exported Fortran level-3 BLAS entry points. Integers are LP64 (32-bit
// INTEGER). Hidden character-length arguments are accepted and passed on
// unchanged, so callers that omit them (C code) and callers that pass them
// (gfortran) both work.

#include <cctype>
#include <complex>
#include <cstddef>

#include "runtime.hpp"

#define SCILIB_EXPORT extern "C" __attribute__((visibility("default")))

namespace scilib::interposer {
namespace {

using flen = std::size_t;
using cfloat = std::complex<float>;
using cdouble = std::complex<double>;

template <class T> constexpr Precision kPrecision = Precision::kD;
template <> constexpr Precision kPrecision<float> = Precision::kS;
template <> constexpr Precision kPrecision<cfloat> = Precision::kC;
template <> constexpr Precision kPrecision<cdouble> = Precision::kZ;

template <class T>
std::complex<double> scalar(const T* p) {
  return p == nullptr ? std::complex<double>{} : std::complex<double>(*p);
}

template <class T>
struct Ops {
  std::size_t index;
  void* real;
};

template <class T>
Ops<T> ops(Family f) {
  const std::size_t index = routine_index({f, kPrecision<T>});
  return {index, real_symbol(index)};
}

char up(const char* c) { return c == nullptr ? '\0' : static_cast<char>(std::toupper(static_cast<unsigned char>(*c))); }

std::int64_t val(const int* p) { return p == nullptr ? 0 : *p; }

bool fill_trans(Trans& out, const char* c) {
  const auto t = parse_trans(up(c));
  if (t) out = *t;
  return t.has_value();
}
bool fill_side(Side& out, const char* c) {
  const auto s = parse_side(up(c));
  if (s) out = *s;
  return s.has_value();
}
bool fill_uplo(Uplo& out, const char* c) {
  const auto u = parse_uplo(up(c));
  if (u) out = *u;
  return u.has_value();
}

// A shape that cannot be modeled gets m = 0 so validation rejects it.
void poison(CallShape& s, bool ok) {
  if (!ok) s.m = s.n = 0;
}

template <class T>
void gemm(const char* ta, const char* tb, const int* m, const int* n, const int* k, const T* alpha, const T* a,
          const int* lda, const T* b, const int* ldb, const T* beta, T* c, const int* ldc, flen l1, flen l2) {
  using Fn = void (*)(const char*, const char*, const int*, const int*, const int*, const T*, const T*, const int*,
                      const T*, const int*, const T*, T*, const int*, flen, flen);
  static const Ops<T> o = ops<T>(Family::kGemm);
  CallShape s;
  s.routine = {Family::kGemm, kPrecision<T>};
  const bool ok = fill_trans(s.trans_a, ta) & fill_trans(s.trans_b, tb);
  s.m = val(m);
  s.n = val(n);
  s.k = val(k);
  s.lda = val(lda);
  s.ldb = val(ldb);
  s.ldc = val(ldc);
  s.alpha = scalar(alpha);
  s.beta = scalar(beta);
  poison(s, ok);
  const void* bases[] = {a, b, c};
  auto run = [&](void* const* p) {
    reinterpret_cast<Fn>(o.real)(ta, tb, m, n, k, alpha, static_cast<const T*>(p[0]), lda,
                                 static_cast<const T*>(p[1]), ldb, beta, static_cast<T*>(p[2]), ldc, l1, l2);
  };
  intercept(o.index, s, bases, 3, run);
}

// symm and hemm share one signature.
template <Family F, class T>
void symm(const char* side, const char* uplo, const int* m, const int* n, const T* alpha, const T* a,
          const int* lda, const T* b, const int* ldb, const T* beta, T* c, const int* ldc, flen l1, flen l2) {
  using Fn = void (*)(const char*, const char*, const int*, const int*, const T*, const T*, const int*, const T*,
                      const int*, const T*, T*, const int*, flen, flen);
  static const Ops<T> o = ops<T>(F);
  CallShape s;
  s.routine = {F, kPrecision<T>};
  const bool ok = fill_side(s.side, side) & fill_uplo(s.uplo, uplo);
  s.m = val(m);
  s.n = val(n);
  s.lda = val(lda);
  s.ldb = val(ldb);
  s.ldc = val(ldc);
  s.alpha = scalar(alpha);
  s.beta = scalar(beta);
  poison(s, ok);
  const void* bases[] = {a, b, c};
  auto run = [&](void* const* p) {
    reinterpret_cast<Fn>(o.real)(side, uplo, m, n, alpha, static_cast<const T*>(p[0]), lda,
                                 static_cast<const T*>(p[1]), ldb, beta, static_cast<T*>(p[2]), ldc, l1, l2);
  };
  intercept(o.index, s, bases, 3, run);
}

// syrk (S = T) and herk (S = real T).
template <Family F, class T, class S>
void syrk(const char* uplo, const char* trans, const int* n, const int* k, const S* alpha, const T* a,
          const int* lda, const S* beta, T* c, const int* ldc, flen l1, flen l2) {
  using Fn = void (*)(const char*, const char*, const int*, const int*, const S*, const T*, const int*, const S*, T*,
                      const int*, flen, flen);
  static const Ops<T> o = ops<T>(F);
  CallShape s;
  s.routine = {F, kPrecision<T>};
  const bool ok = fill_uplo(s.uplo, uplo) & fill_trans(s.trans_a, trans);
  s.m = val(n);
  s.n = val(n);
  s.k = val(k);
  s.lda = val(lda);
  s.ldc = val(ldc);
  s.alpha = scalar(alpha);
  s.beta = scalar(beta);
  poison(s, ok);
  const void* bases[] = {a, c};
  auto run = [&](void* const* p) {
    reinterpret_cast<Fn>(o.real)(uplo, trans, n, k, alpha, static_cast<const T*>(p[0]), lda, beta,
                                 static_cast<T*>(p[1]), ldc, l1, l2);
  };
  intercept(o.index, s, bases, 2, run);
}

// syr2k (S = T) and her2k (S = real T; alpha stays complex).
template <Family F, class T, class S>
void syr2k(const char* uplo, const char* trans, const int* n, const int* k, const T* alpha, const T* a,
           const int* lda, const T* b, const int* ldb, const S* beta, T* c, const int* ldc, flen l1, flen l2) {
  using Fn = void (*)(const char*, const char*, const int*, const int*, const T*, const T*, const int*, const T*,
                      const int*, const S*, T*, const int*, flen, flen);
  static const Ops<T> o = ops<T>(F);
  CallShape s;
  s.routine = {F, kPrecision<T>};
  const bool ok = fill_uplo(s.uplo, uplo) & fill_trans(s.trans_a, trans);
  s.trans_b = s.trans_a;
  s.m = val(n);
  s.n = val(n);
  s.k = val(k);
  s.lda = val(lda);
  s.ldb = val(ldb);
  s.ldc = val(ldc);
  s.alpha = scalar(alpha);
  s.beta = scalar(beta);
  poison(s, ok);
  const void* bases[] = {a, b, c};
  auto run = [&](void* const* p) {
    reinterpret_cast<Fn>(o.real)(uplo, trans, n, k, alpha, static_cast<const T*>(p[0]), lda,
                                 static_cast<const T*>(p[1]), ldb, beta, static_cast<T*>(p[2]), ldc, l1, l2);
  };
  intercept(o.index, s, bases, 3, run);
}

// trmm and trsm.
template <Family F, class T>
void trxm(const char* side, const char* uplo, const char* transa, const char* diag, const int* m,
          const int* n, const T* alpha, const T* a, const int* lda, T* b, const int* ldb, flen l1, flen l2, flen l3,
          flen l4) {
  using Fn = void (*)(const char*, const char*, const char*, const char*, const int*, const int*, const T*,
                      const T*, const int*, T*, const int*, flen, flen, flen, flen);
  static const Ops<T> o = ops<T>(F);
  CallShape s;
  s.routine = {F, kPrecision<T>};
  const char d = up(diag);
  const bool ok = fill_side(s.side, side) & fill_uplo(s.uplo, uplo) & fill_trans(s.trans_a, transa) &
                  (d == 'U' || d == 'N');
  s.m = val(m);
  s.n = val(n);
  s.lda = val(lda);
  s.ldb = val(ldb);
  s.alpha = scalar(alpha);
  poison(s, ok);
  const void* bases[] = {a, b};
  auto run = [&](void* const* p) {
    reinterpret_cast<Fn>(o.real)(side, uplo, transa, diag, m, n, alpha, static_cast<const T*>(p[0]), lda,
                                 static_cast<T*>(p[1]), ldb, l1, l2, l3, l4);
  };
  intercept(o.index, s, bases, 2, run);
}

}  // namespace
}  // namespace scilib::interposer

using namespace scilib::interposer;  // NOLINT(google-build-using-namespace)
using scilib::Family;

// Each routine is exported as NAME_ and NAME; both reach the CPU NAME_.
#define SCILIB_GEMM(P, T)                                                                                          \
  SCILIB_EXPORT void P##gemm_(const char* ta, const char* tb, const int* m, const int* n, const int* k,            \
                              const T* alpha, const T* a, const int* lda, const T* b, const int* ldb, const T* beta, \
                              T* c, const int* ldc, flen l1, flen l2) {                                            \
    gemm<T>(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc, l1, l2);                                         \
  }                                                                                                                \
  SCILIB_EXPORT void P##gemm(const char* ta, const char* tb, const int* m, const int* n, const int* k,             \
                             const T* alpha, const T* a, const int* lda, const T* b, const int* ldb, const T* beta,  \
                             T* c, const int* ldc, flen l1, flen l2) {                                             \
    gemm<T>(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc, l1, l2);                                         \
  }

#define SCILIB_SYMM(NAME, FAM, T)                                                                                  \
  SCILIB_EXPORT void NAME##_(const char* side, const char* uplo, const int* m, const int* n, const T* alpha,       \
                             const T* a, const int* lda, const T* b, const int* ldb, const T* beta, T* c,          \
                             const int* ldc, flen l1, flen l2) {                                                   \
    symm<FAM, T>(side, uplo, m, n, alpha, a, lda, b, ldb, beta, c, ldc, l1, l2);                                   \
  }                                                                                                                \
  SCILIB_EXPORT void NAME(const char* side, const char* uplo, const int* m, const int* n, const T* alpha,           \
                          const T* a, const int* lda, const T* b, const int* ldb, const T* beta, T* c,             \
                          const int* ldc, flen l1, flen l2) {                                                      \
    symm<FAM, T>(side, uplo, m, n, alpha, a, lda, b, ldb, beta, c, ldc, l1, l2);                                   \
  }

#define SCILIB_SYRK(NAME, FAM, T, S)                                                                               \
  SCILIB_EXPORT void NAME##_(const char* uplo, const char* trans, const int* n, const int* k, const S* alpha,      \
                             const T* a, const int* lda, const S* beta, T* c, const int* ldc, flen l1, flen l2) {  \
    syrk<FAM, T, S>(uplo, trans, n, k, alpha, a, lda, beta, c, ldc, l1, l2);                                       \
  }                                                                                                                \
  SCILIB_EXPORT void NAME(const char* uplo, const char* trans, const int* n, const int* k, const S* alpha,         \
                          const T* a, const int* lda, const S* beta, T* c, const int* ldc, flen l1, flen l2) {     \
    syrk<FAM, T, S>(uplo, trans, n, k, alpha, a, lda, beta, c, ldc, l1, l2);                                       \
  }

#define SCILIB_SYR2K(NAME, FAM, T, S)                                                                              \
  SCILIB_EXPORT void NAME##_(const char* uplo, const char* trans, const int* n, const int* k, const T* alpha,      \
                             const T* a, const int* lda, const T* b, const int* ldb, const S* beta, T* c,          \
                             const int* ldc, flen l1, flen l2) {                                                   \
    syr2k<FAM, T, S>(uplo, trans, n, k, alpha, a, lda, b, ldb, beta, c, ldc, l1, l2);                              \
  }                                                                                                                \
  SCILIB_EXPORT void NAME(const char* uplo, const char* trans, const int* n, const int* k, const T* alpha,         \
                          const T* a, const int* lda, const T* b, const int* ldb, const S* beta, T* c,             \
                          const int* ldc, flen l1, flen l2) {                                                      \
    syr2k<FAM, T, S>(uplo, trans, n, k, alpha, a, lda, b, ldb, beta, c, ldc, l1, l2);                              \
  }

#define SCILIB_TRXM(NAME, FAM, T)                                                                                  \
  SCILIB_EXPORT void NAME##_(const char* side, const char* uplo, const char* transa, const char* diag,             \
                             const int* m, const int* n, const T* alpha, const T* a, const int* lda, T* b,         \
                             const int* ldb, flen l1, flen l2, flen l3, flen l4) {                                 \
    trxm<FAM, T>(side, uplo, transa, diag, m, n, alpha, a, lda, b, ldb, l1, l2, l3, l4);                           \
  }                                                                                                                \
  SCILIB_EXPORT void NAME(const char* side, const char* uplo, const char* transa, const char* diag, const int* m,  \
                          const int* n, const T* alpha, const T* a, const int* lda, T* b, const int* ldb, flen l1, \
                          flen l2, flen l3, flen l4) {                                                             \
    trxm<FAM, T>(side, uplo, transa, diag, m, n, alpha, a, lda, b, ldb, l1, l2, l3, l4);                           \
  }

#define SCILIB_PRECISION(P, T)                        \
  SCILIB_GEMM(P, T)                                   \
  SCILIB_SYMM(P##symm, Family::kSymm, T)              \
  SCILIB_SYRK(P##syrk, Family::kSyrk, T, T)           \
  SCILIB_SYR2K(P##syr2k, Family::kSyr2k, T, T)        \
  SCILIB_TRXM(P##trmm, Family::kTrmm, T)              \
  SCILIB_TRXM(P##trsm, Family::kTrsm, T)

#define SCILIB_HERMITIAN(P, T, R)                     \
  SCILIB_SYMM(P##hemm, Family::kHemm, T)              \
  SCILIB_SYRK(P##herk, Family::kHerk, T, R)           \
  SCILIB_SYR2K(P##her2k, Family::kHer2k, T, R)

SCILIB_PRECISION(s, float)
SCILIB_PRECISION(d, double)
SCILIB_PRECISION(c, cfloat)
SCILIB_PRECISION(z, cdouble)
SCILIB_HERMITIAN(c, cfloat, float)
SCILIB_HERMITIAN(z, cdouble, double)
