// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "oracles.hpp"
#include "scilib/blas_model.hpp"

namespace scilib {
namespace {

using testing::Gen;
using testing::navg_oracle;

BlasCall gemm(std::int64_t m, std::int64_t n, std::int64_t k, Precision p = Precision::kD) {
  CallShape s;
  s.routine = {Family::kGemm, p};
  s.m = m;
  s.n = n;
  s.k = k;
  return make_call(s, {0x1000000, 0x2000000, 0x3000000});
}

TEST(Navg, Examples) {
  EXPECT_EQ(navg(gemm(2000, 2000, 2000)), 2000.0);
  EXPECT_EQ(navg(gemm(1, 1, 1)), 1.0);
  EXPECT_NEAR(navg(gemm(32, 2400, 93536)), 1929.5083895573772, 1e-9);
}

TEST(Navg, MatchesHighPrecisionOracleOnRandomTriples) {
  Gen g(20260101);
  for (int i = 0; i < 10000; ++i) {
    // Mix small and very large magnitudes.
    const std::int64_t hi = g.coin() ? 4096 : (1 << 20);
    const auto m = g.range(1, hi), n = g.range(1, hi), k = g.range(1, hi);
    const double want = navg_oracle(m, n, k);
    const double got = navg(gemm(m, n, k));
    ASSERT_LE(std::abs(got - want) / want, 1e-9) << m << "x" << n << "x" << k;
  }
}

TEST(Navg, NonGemmFamiliesUseTheDominantFlopProduct) {
  CallShape s;
  s.m = 300;
  s.n = 700;
  s.k = 900;
  const std::vector<std::uint64_t> bases = {0x10000, 0x20000000, 0x40000000};

  for (Family f : {Family::kSymm, Family::kTrmm, Family::kTrsm}) {
    s.routine = {f, Precision::kD};
    s.k = kNoK;
    const std::vector<std::uint64_t> b(bases.begin(), bases.begin() + static_cast<long>(operand_count(f)));
    s.side = Side::kLeft;
    EXPECT_NEAR(navg(make_call(s, b)), navg_oracle(300, 300, 700), 1e-9);
    s.side = Side::kRight;
    EXPECT_NEAR(navg(make_call(s, b)), navg_oracle(300, 700, 700), 1e-9);
  }
  s.routine = {Family::kHemm, Precision::kZ};
  s.side = Side::kLeft;
  EXPECT_NEAR(navg(make_call(s, bases)), navg_oracle(300, 300, 700), 1e-9);

  s.m = s.n = 700;
  s.k = 900;
  for (Family f : {Family::kSyrk, Family::kSyr2k, Family::kHerk, Family::kHer2k}) {
    s.routine = {f, Precision::kC};
    const std::vector<std::uint64_t> b(bases.begin(), bases.begin() + static_cast<long>(operand_count(f)));
    EXPECT_NEAR(navg(make_call(s, b)), navg_oracle(700, 700, 900), 1e-9);
  }
}

TEST(Navg, ComplexWeightingIsNotFolded) {
  EXPECT_EQ(navg(gemm(700, 800, 900, Precision::kZ)), navg(gemm(700, 800, 900, Precision::kD)));
}

TEST(Navg, SymmetricInGemmDimensions) {
  Gen g(7);
  for (int i = 0; i < 2000; ++i) {
    std::array<std::int64_t, 3> d = {g.range(1, 5000), g.range(1, 5000), g.range(1, 5000)};
    const double ref = navg(gemm(d[0], d[1], d[2]));
    std::sort(d.begin(), d.end());
    do {
      ASSERT_NEAR(navg(gemm(d[0], d[1], d[2])), ref, ref * 1e-14);
    } while (std::next_permutation(d.begin(), d.end()));
  }
}

TEST(Navg, ScalesLinearly) {
  Gen g(8);
  for (int i = 0; i < 2000; ++i) {
    const auto m = g.range(1, 100000), n = g.range(1, 100000), k = g.range(1, 100000);
    const double one = navg(gemm(m, n, k));
    ASSERT_NEAR(navg(gemm(2 * m, 2 * n, 2 * k)), 2 * one, one * 1e-13);
  }
}

TEST(ShouldOffload, BoundaryIsStrict) {
  EXPECT_FALSE(should_offload(gemm(500, 500, 500), 500));
  EXPECT_TRUE(should_offload(gemm(500, 500, 501), 500));
  EXPECT_TRUE(should_offload(gemm(2000, 2000, 2000), 500));
  EXPECT_TRUE(should_offload(gemm(32, 2400, 93536), 500));
  EXPECT_FALSE(should_offload(gemm(100, 100, 100)));
  // Default threshold.
  EXPECT_FALSE(should_offload(gemm(500, 500, 500)));
  EXPECT_TRUE(should_offload(gemm(501, 500, 500)));
}

TEST(ShouldOffload, ExhaustiveAroundThreshold) {
  // Every triple whose product is within a few cubes of 500^3. The gate
  // must agree with the exact integer comparison m*n*k > 500^3.
  const std::int64_t cube = 500LL * 500 * 500;
  for (std::int64_t m = 490; m <= 510; ++m) {
    for (std::int64_t n = 490; n <= 510; ++n) {
      for (std::int64_t k = 490; k <= 510; ++k) {
        ASSERT_EQ(should_offload(gemm(m, n, k), 500), m * n * k > cube) << m << " " << n << " " << k;
      }
    }
  }
  // Perfect cubes sit exactly on the threshold they define.
  for (std::int64_t t = 1; t <= 3000; ++t) {
    ASSERT_FALSE(should_offload(gemm(t, t, t), static_cast<double>(t)));
    ASSERT_TRUE(should_offload(gemm(t, t, t + 1), static_cast<double>(t)));
  }
}

TEST(ShouldOffload, ThresholdPlusEpsilon) {
  const double above = std::nextafter(500.0, 1000.0);
  EXPECT_FALSE(should_offload(gemm(500, 500, 500), 500.0));
  EXPECT_FALSE(should_offload(gemm(500, 500, 500), above));
  EXPECT_TRUE(should_offload(gemm(500, 500, 500), std::nextafter(500.0, 0.0)));
}

TEST(ShouldOffload, MonotoneInEveryDimension) {
  Gen g(9);
  for (int i = 0; i < 5000; ++i) {
    const auto m = g.range(1, 1500), n = g.range(1, 1500), k = g.range(1, 1500);
    if (!should_offload(gemm(m, n, k))) continue;
    ASSERT_TRUE(should_offload(gemm(m + g.range(0, 100), n, k)));
    ASSERT_TRUE(should_offload(gemm(m, n + g.range(0, 100), k)));
    ASSERT_TRUE(should_offload(gemm(m, n, k + g.range(0, 100))));
  }
}

TEST(OperandBytes, Examples) {
  OperandSpan a{0, 32, 93536, 32, 8, OperandRole::kInput};
  EXPECT_EQ(operand_bytes(a), 23945216u);
  OperandSpan b{0, 93536, 2400, 93536, 8, OperandRole::kInput};
  EXPECT_EQ(operand_bytes(b), 1795891200u);
  OperandSpan one{0, 1, 1, 1, 8, OperandRole::kInput};
  EXPECT_EQ(operand_bytes(one), 8u);
}

TEST(OperandBytes, PaddingAndTightLayouts) {
  Gen g(10);
  for (int i = 0; i < 5000; ++i) {
    const auto rows = g.range(1, 3000), cols = g.range(1, 3000);
    const auto eb = static_cast<std::uint32_t>(g.pick(std::vector<int>{4, 8, 16}));
    OperandSpan tight{0x1000, rows, cols, rows, eb, OperandRole::kInput};
    ASSERT_EQ(operand_bytes(tight), static_cast<std::uint64_t>(rows * cols) * eb);
    ASSERT_EQ(operand_bytes(tight), testing::span_bytes(tight));
    OperandSpan padded = tight;
    padded.ld = rows + g.range(1, 50);
    ASSERT_EQ(operand_bytes(padded), testing::span_bytes(padded));
    if (cols > 1) {
      ASSERT_GT(operand_bytes(padded), operand_bytes(tight));
    }
  }
}

TEST(OperandSpan, OverflowIsMalformed) {
  OperandSpan s{~0ULL - 8, 4, 4, 4, 8, OperandRole::kInput};
  EXPECT_FALSE(s.well_formed());
  s.base = 0x1000;
  EXPECT_TRUE(s.well_formed());
}

TEST(Routines, ParseAndName) {
  EXPECT_EQ(all_routines().size(), 30u);
  std::set<std::string> names;
  for (const Routine& r : all_routines()) {
    names.insert(r.name());
    ASSERT_EQ(parse_routine(r.name()), r);
    ASSERT_EQ(parse_routine(r.name() + "_"), r);
  }
  EXPECT_EQ(names.size(), 30u);
  EXPECT_EQ(parse_routine("ZGEMM")->precision, Precision::kZ);
  EXPECT_FALSE(parse_routine("dherk"));
  EXPECT_FALSE(parse_routine("dgemv"));
  EXPECT_FALSE(parse_routine("xgemm"));
  EXPECT_FALSE(parse_routine(""));
}

TEST(MakeCall, TransposeAffectsOnlyAAndB) {
  CallShape s;
  s.routine = {Family::kGemm, Precision::kD};
  s.trans_a = Trans::kT;
  s.m = 32;
  s.n = 2400;
  s.k = 93536;
  const BlasCall c = make_call(s, {0x10000, 0x20000000, 0x90000000});
  ASSERT_EQ(c.operands.size(), 3u);
  EXPECT_EQ(c.operands[0].rows, 93536);
  EXPECT_EQ(c.operands[0].cols, 32);
  EXPECT_EQ(c.operands[1].rows, 93536);
  EXPECT_EQ(c.operands[1].cols, 2400);
  EXPECT_EQ(c.operands[2].rows, 32);
  EXPECT_EQ(c.operands[2].cols, 2400);
  EXPECT_EQ(c.operands[2].role, OperandRole::kOutput);
  s.beta = 1.0;
  EXPECT_EQ(make_call(s, {1, 2, 3}).operands[2].role, OperandRole::kInOut);
  EXPECT_EQ(operand_bytes(c.operands[0]), 23945216u);
}

TEST(MakeCall, RoutineShapes) {
  CallShape s;
  s.m = 40;
  s.n = 60;
  s.side = Side::kRight;
  s.routine = {Family::kTrsm, Precision::kZ};
  const BlasCall t = make_call(s, {0x1000, 0x2000});
  ASSERT_EQ(t.operands.size(), 2u);
  EXPECT_EQ(t.operands[0].rows, 60);  // A is n x n on the right
  EXPECT_EQ(t.operands[1].role, OperandRole::kInOut);
  EXPECT_NO_THROW(validate(t));

  s.routine = {Family::kHerk, Precision::kC};
  s.m = s.n = 50;
  s.k = 7;
  s.trans_a = Trans::kN;
  const BlasCall h = make_call(s, {0x1000, 0x2000});
  EXPECT_EQ(h.operands[0].rows, 50);
  EXPECT_EQ(h.operands[0].cols, 7);
  EXPECT_EQ(h.operands[1].rows, 50);
  EXPECT_NO_THROW(validate(h));
}

TEST(Validate, RejectsMalformedCalls) {
  BlasCall c = gemm(10, 10, 10);
  c.m = 0;
  EXPECT_THROW(validate(c), InvalidCall);
  c = gemm(10, 10, 10);
  c.operands.pop_back();
  EXPECT_THROW(validate(c), InvalidCall);
  c = gemm(10, 10, 10);
  c.operands[1].ld = 3;
  EXPECT_THROW(validate(c), InvalidCall);
  c = gemm(10, 10, 10);
  c.operands[0].rows = 11;
  EXPECT_THROW(validate(c), InvalidCall);
  c = gemm(10, 10, 10);
  c.routine = {Family::kHemm, Precision::kD};
  EXPECT_THROW(validate(c), InvalidCall);
  c = gemm(10, 10, 10);
  c.operands[2].elem_bytes = 4;
  EXPECT_THROW(validate(c), InvalidCall);
  EXPECT_TRUE(is_well_formed(gemm(10, 10, 10)));
}

TEST(Validate, RandomCallsAreWellFormed) {
  Gen g(11);
  for (int i = 0; i < 2000; ++i) {
    const BlasCall c = testing::random_call(g, 400, 64, 65536);
    ASSERT_NO_THROW(validate(c)) << c.routine.name();
  }
}

TEST(Flops, StandardCounts) {
  EXPECT_EQ(flops(gemm(10, 20, 30)), 2.0 * 10 * 20 * 30);
  EXPECT_EQ(flops(gemm(10, 20, 30, Precision::kZ)), 4 * 2.0 * 10 * 20 * 30);
  CallShape s;
  s.routine = {Family::kTrsm, Precision::kD};
  s.m = 10;
  s.n = 20;
  EXPECT_EQ(flops(make_call(s, {1, 2})), 10.0 * 10 * 20);
  s.side = Side::kRight;
  EXPECT_EQ(flops(make_call(s, {1, 2})), 10.0 * 20 * 20);
}

}  // namespace
}  // namespace scilib
