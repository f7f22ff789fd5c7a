// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <map>

#include "oracles.hpp"
#include "scilib/policy.hpp"
#include "scilib/residency_map.hpp"
#include "scilib/simulator.hpp"

namespace scilib {
namespace {

using testing::FirstUseOracle;
using testing::Gen;

constexpr std::uint64_t k64K = 65536;

BlasCall gemm(std::int64_t m, std::int64_t n, std::int64_t k, std::vector<std::uint64_t> bases, double beta = 0.0) {
  CallShape s;
  s.routine = {Family::kGemm, Precision::kD};
  s.m = m;
  s.n = n;
  s.k = k;
  s.beta = beta;
  return make_call(s, bases);
}

// Page-aligned, well separated operands.
std::vector<std::uint64_t> aligned(int count, std::uint64_t stride = 1ULL << 34) {
  std::vector<std::uint64_t> v;
  for (int i = 0; i < count; ++i) v.push_back((static_cast<std::uint64_t>(i) + 1) * stride);
  return v;
}

std::uint64_t sum_kind(const MovementPlan& p, ActionKind kind) {
  std::uint64_t total = 0;
  for (const auto& a : p.actions) {
    if (a.kind == kind) total += a.bytes;
  }
  return total;
}

TEST(PagesOf, Examples) {
  OperandSpan s{0x10000, 8, 1, 8, 1, OperandRole::kInput};
  EXPECT_EQ(pages_of(s, 4096).count, 1u);
  s.rows = s.ld = 4097;
  EXPECT_EQ(pages_of(s, 4096).count, 2u);
  EXPECT_EQ(pages_of(s, 4096).first, 0x10u);
  OperandSpan b{1ULL << 34, 93536, 2400, 93536, 8, OperandRole::kInput};
  EXPECT_EQ(pages_of(b, k64K).count, 27404u);
  EXPECT_EQ(pages_of(b, k64K).count, (1795891200ULL + k64K - 1) / k64K);
}

TEST(PagesOf, MatchesIntegerOracle) {
  Gen g(21);
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t page = g.coin() ? 4096 : k64K;
    OperandSpan s{g.raw() >> 20, g.range(1, 2000), g.range(1, 2000), 0, 8, OperandRole::kInput};
    s.ld = s.rows + g.range(0, 10);
    const auto [lo, hi] = testing::page_span(s.base, testing::span_bytes(s), page);
    const PageRange r = pages_of(s, page);
    ASSERT_EQ(r.first, lo);
    ASSERT_EQ(r.last(), hi);
    ASSERT_EQ(r.count, (s.base % page + testing::span_bytes(s) + page - 1) / page);
  }
}

TEST(PlanMemcopy, Gemm2000) {
  const MovementPlan p = plan_memcopy(gemm(2000, 2000, 2000, aligned(3)));
  EXPECT_EQ(p.kernel_domain, MemoryDomain::kDevice);
  EXPECT_EQ(sum_kind(p, ActionKind::kCopyH2D), 64000000u);
  EXPECT_EQ(sum_kind(p, ActionKind::kCopyD2H), 32000000u);
  EXPECT_EQ(p.bytes_moved(), 96000000u);
  EXPECT_EQ(p.migrated_bytes(), 0u);
}

TEST(PlanMemcopy, SkinnyShape) {
  const MovementPlan p = plan_memcopy(gemm(32, 2400, 93536, aligned(3)));
  EXPECT_EQ(sum_kind(p, ActionKind::kCopyH2D), 23945216u + 1795891200u);
  EXPECT_EQ(sum_kind(p, ActionKind::kCopyD2H), 32u * 2400 * 8);
}

TEST(PlanMemcopy, BetaNonZeroCopiesCIn) {
  const MovementPlan p0 = plan_memcopy(gemm(100, 100, 100, aligned(3), 0.0));
  const MovementPlan p1 = plan_memcopy(gemm(100, 100, 100, aligned(3), 1.0));
  EXPECT_EQ(sum_kind(p1, ActionKind::kCopyH2D), sum_kind(p0, ActionKind::kCopyH2D) + 80000);
  bool c_in = false;
  for (const auto& a : p1.actions) c_in = c_in || (a.kind == ActionKind::kCopyH2D && a.operand == 2);
  EXPECT_TRUE(c_in);
}

TEST(PlanMemcopy, IsStatelessAndLinear) {
  const BlasCall c = gemm(1000, 1000, 1000, aligned(3));
  std::uint64_t total = 0;
  for (int t = 1; t <= 5; ++t) {
    total += plan_memcopy(c).bytes_moved();
    EXPECT_EQ(total, static_cast<std::uint64_t>(t) * 24000000u);
  }
}

TEST(PlanFirstUse, SecondIdenticalCallMovesNothing) {
  ResidencyMap map(k64K);
  const BlasCall c = gemm(2000, 2000, 2000, aligned(3));
  const MovementPlan first = plan_first_use(c, map, 1);
  std::uint64_t footprint = 0;
  for (const auto& op : c.operands) footprint += pages_of(op, k64K).count * k64K;
  EXPECT_EQ(first.migrated_bytes(), footprint);
  EXPECT_NEAR(static_cast<double>(footprint), 96e6, 0.01 * 96e6);
  for (const auto& a : first.actions) EXPECT_EQ(a.bytes % k64K, 0u);

  const MovementPlan second = plan_first_use(c, map, 2);
  EXPECT_EQ(second.migrated_bytes(), 0u);
  EXPECT_TRUE(second.actions.empty());
  for (const auto& op : c.operands) {
    const PageRange r = pages_of(op, k64K);
    for (auto p = r.first; p <= r.last(); ++p) ASSERT_EQ(map.state(p).device_reuse_count, 1u);
  }
  EXPECT_EQ(second.operand_reused, std::vector<bool>(3, true));
}

TEST(PlanFirstUse, ChainReusesIntermediate) {
  // C = A B then E = D C.
  const auto b = aligned(5);
  ResidencyMap map(k64K);
  const MovementPlan p1 = plan_first_use(gemm(1000, 1000, 1000, {b[0], b[1], b[2]}), map, 1);
  const MovementPlan p2 = plan_first_use(gemm(1000, 1000, 1000, {b[3], b[2], b[4]}), map, 2);
  const std::uint64_t per = pages_of(OperandSpan{b[0], 1000, 1000, 1000, 8, OperandRole::kInput}, k64K).count * k64K;
  EXPECT_EQ(p1.migrated_bytes(), 3 * per);
  EXPECT_EQ(p2.migrated_bytes(), 2 * per);
  EXPECT_EQ(p2.operand_reused, (std::vector<bool>{false, true, false}));
  for (const auto& a : p2.actions) EXPECT_NE(a.operand, 1u);
}

TEST(PlanFirstUse, PartialPagesMigrateWhole) {
  ResidencyMap map(4096);
  const auto c = gemm(10, 10, 10, {0x100010, 0x100400, 0x200000});
  const MovementPlan p = plan_first_use(c, map, 1);
  // A and B share page 0x100; C has its own.
  EXPECT_EQ(p.migrated_bytes(), 2 * 4096u);
}

TEST(PlanFirstUse, PagesNeverReturnToHost) {
  Gen g(31);
  ResidencyMap map(4096);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 500; ++i) {
    plan_first_use(testing::random_call(g, 120, 256, 4096), map, i + 1);
    std::set<std::uint64_t> now;
    map.for_each_tracked([&](std::uint64_t page, const PageState& s) {
      if (s.domain == MemoryDomain::kDevice) now.insert(page);
    });
    for (auto p : seen) ASSERT_TRUE(now.count(p));
    seen = now;
  }
}

TEST(PlanFirstUse, CapacityIsAnErrorNotAnEviction) {
  ResidencyMap map(k64K, 30 * k64K);
  EXPECT_THROW(plan_first_use(gemm(1000, 1000, 1000, aligned(3)), map, 1), CapacityExceeded);
  EXPECT_EQ(map.device_pages(), 0u);
}

TEST(Counter, MeasuredDecisionRows) {
  const CounterEmulatorConfig cfg;
  EXPECT_EQ(counter_migration_choice(gemm(1000, 1000, 1000, aligned(3)), cfg), (std::vector<bool>{true, true, true}));
  EXPECT_EQ(counter_migration_choice(gemm(5000, 5000, 5000, aligned(3)), cfg),
            (std::vector<bool>{true, true, false}));
  EXPECT_EQ(counter_migration_choice(gemm(20000, 20000, 20000, aligned(3)), cfg),
            (std::vector<bool>{true, false, false}));
  EXPECT_EQ(counter_migration_choice(gemm(32, 2400, 93536, aligned(3)), cfg),
            (std::vector<bool>{true, false, false}));
}

TEST(Counter, PlanFollowsChoiceAndStaysMigrated) {
  ResidencyMap map(k64K);
  const BlasCall c = gemm(20000, 20000, 20000, aligned(3));
  const MovementPlan p = plan_counter_emulated(c, map, CounterEmulatorConfig{}, 1);
  ASSERT_EQ(p.actions.size(), 1u);
  EXPECT_EQ(p.actions[0].operand, 0u);
  EXPECT_EQ(p.operand_domains,
            (std::vector<MemoryDomain>{MemoryDomain::kDevice, MemoryDomain::kHost, MemoryDomain::kHost}));
  const MovementPlan again = plan_counter_emulated(c, map, CounterEmulatorConfig{}, 2);
  EXPECT_EQ(again.migrated_bytes(), 0u);
  EXPECT_TRUE(map.all_device(pages_of(c.operands[0], k64K)));
}

TEST(Counter, MonotoneInRemotePenalty) {
  Gen g(41);
  for (int i = 0; i < 3000; ++i) {
    const BlasCall c = testing::random_call(g, 6000, 1 << 20, k64K);
    CounterEmulatorConfig lo;
    lo.remote_penalty_per_byte = 1e-14 * static_cast<double>(g.range(1, 1000));
    CounterEmulatorConfig hi = lo;
    hi.remote_penalty_per_byte *= 1.0 + static_cast<double>(g.range(0, 100)) / 10.0;
    const auto a = counter_migration_choice(c, lo);
    const auto b = counter_migration_choice(c, hi);
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (a[j]) {
        ASSERT_TRUE(b[j]);
      }
    }
  }
}

TEST(Counter, TrafficCountsOutputsTwice) {
  OperandSpan s{0, 10, 10, 10, 8, OperandRole::kInput};
  EXPECT_EQ(traffic_bytes(s), 800u);
  s.role = OperandRole::kOutput;
  EXPECT_EQ(traffic_bytes(s), 1600u);
  s.role = OperandRole::kInOut;
  EXPECT_EQ(traffic_bytes(s), 1600u);
}

TEST(RecordCpu, EmptyHostPlanAndMapUntouched) {
  ResidencyMap map(k64K);
  for (const auto& c : {gemm(100, 100, 100, aligned(3)), gemm(500, 500, 500, aligned(3))}) {
    const MovementPlan p = record_cpu_execution(c, map);
    EXPECT_TRUE(p.actions.empty());
    EXPECT_EQ(p.kernel_domain, MemoryDomain::kHost);
  }
  EXPECT_EQ(map.tracked_pages(), 0u);
}

// Random traces over a small arena: operands overlap, alias and share
// pages. Checks exactly-once migration per page against a set oracle, and
// the simulator's bytes and reuse counts against a brute-force replay.
TEST(FirstUseProperty, ExactlyOnceMigrationOverRandomTraces) {
  Gen g(20261016);
  for (int trace_no = 0; trace_no < 1000; ++trace_no) {
    const std::uint64_t page = g.coin() ? 4096 : k64K;
    const double threshold = static_cast<double>(g.range(20, 200));
    const auto len = g.range(1, 30);
    std::vector<BlasCall> calls;
    for (int i = 0; i < len; ++i) calls.push_back(testing::random_call(g, 300, g.range(4, 64), page));

    ResidencyMap map(page);
    FirstUseOracle oracle{page, {}, {}, 0};
    std::map<std::uint64_t, std::uint64_t> per_page;
    for (std::size_t i = 0; i < calls.size(); ++i) {
      if (!should_offload(calls[i], threshold)) continue;
      oracle.offload(calls[i]);
      const MovementPlan p = plan_first_use(calls[i], map, i + 1);
      for (const auto& a : p.actions) {
        ASSERT_EQ(a.kind, ActionKind::kMigrateH2D);
        std::uint64_t run_bytes = 0;
        for (const auto& r : a.runs) {
          for (auto pg = r.first; pg <= r.last(); ++pg) per_page[pg] += page;
          run_bytes += r.count * page;
        }
        ASSERT_EQ(run_bytes, a.bytes);
      }
    }
    std::uint64_t total = 0;
    for (const auto& [pg, bytes] : per_page) {
      ASSERT_EQ(bytes, page) << "page " << pg << " in trace " << trace_no;
      ASSERT_TRUE(oracle.device.count(pg));
      total += bytes;
    }
    ASSERT_EQ(total, page * oracle.device.size());
    ASSERT_EQ(total, oracle.migrated_bytes);

    SimulationOptions opt;
    opt.threshold = threshold;
    opt.page_size = page;
    const PolicyReport r = simulate(testing::as_trace(calls), Policy::kFirstUse, opt);
    ASSERT_EQ(r.bytes_moved, oracle.migrated_bytes);
    ASSERT_EQ(r.per_buffer_reuse.size(), oracle.reuse.size());
    for (const auto& b : r.per_buffer_reuse) {
      const auto it = oracle.reuse.find({b.base, b.bytes});
      ASSERT_NE(it, oracle.reuse.end());
      ASSERT_EQ(b.reuse, it->second) << "buffer 0x" << std::hex << b.base;
    }
  }
}

TEST(FirstUseProperty, ReuseIsTMinusOneForRepeatedCalls) {
  for (int t : {1, 2, 5, 10, 37}) {
    const BlasCall c = gemm(800, 700, 900, {0x7f0000010010, 0x7f0010000000, 0x7f0020000040}, 1.0);
    std::vector<BlasCall> calls(static_cast<std::size_t>(t), c);
    FirstUseOracle oracle{k64K, {}, {}, 0};
    for (const auto& x : calls) oracle.offload(x);
    const PolicyReport r = simulate(testing::as_trace(calls), Policy::kFirstUse, {});
    ASSERT_EQ(r.per_buffer_reuse.size(), 3u);
    for (const auto& b : r.per_buffer_reuse) {
      EXPECT_EQ(b.reuse, static_cast<std::uint64_t>(t - 1));
      EXPECT_EQ(b.reuse, (oracle.reuse[{b.base, b.bytes}]));
      EXPECT_TRUE(b.device_resident);
    }
    EXPECT_DOUBLE_EQ(r.mean_reuse, t - 1);
    EXPECT_EQ(r.bytes_moved, oracle.migrated_bytes);

    const PolicyReport mc = simulate(testing::as_trace(calls), Policy::kMemCopy, {});
    EXPECT_EQ(mc.bytes_moved, static_cast<std::uint64_t>(t) * plan_memcopy(c).bytes_moved());
    if (t >= 2) {
      EXPECT_GT(mc.bytes_moved, r.bytes_moved);
    }
  }
}

}  // namespace
}  // namespace scilib
