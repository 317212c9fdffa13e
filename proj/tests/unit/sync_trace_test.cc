// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "fixtures.h"
#include "stallslice/sync_trace.h"

namespace stallslice {
namespace {

using testing::cfg_of;

std::set<std::pair<size_t, size_t>> pairs(const SyncTraceResult& r) {
  std::set<std::pair<size_t, size_t>> out;
  for (const auto& e : r.edges) out.insert({e.producer, e.consumer});
  return out;
}

using Pairs = std::set<std::pair<size_t, size_t>>;

TEST(TraceWaitcnt, OldestPendingOperations) {
  const auto cfg = cfg_of(Dialect::kAmd,
                          ".kernel k\n global_load_dword v1, v0, off\n global_load_dword v2, v0, off\n"
                          " global_load_dword v3, v0, off\n s_waitcnt vmcnt(1)\n");
  const auto r = trace_waitcnt(cfg);
  EXPECT_EQ(pairs(r), (Pairs{{0, 3}, {1, 3}}));
  for (const auto& e : r.edges) {
    EXPECT_EQ(e.kind, EdgeKind::kMemWaitcnt);
    EXPECT_FALSE(e.reg.has_value());
    EXPECT_EQ(e.dep_class, DepClass::kMemory);
  }
  EXPECT_TRUE(r.diagnostics.empty());
}

TEST(TraceWaitcnt, DrainAll) {
  const auto cfg = cfg_of(Dialect::kAmd,
                          ".kernel k\n global_load_dword v1, v0, off\n global_load_dword v2, v0, off\n"
                          " s_waitcnt vmcnt(0)\n");
  EXPECT_EQ(pairs(trace_waitcnt(cfg)), (Pairs{{0, 2}, {1, 2}}));
}

TEST(TraceWaitcnt, EpochBoundary) {
  const auto cfg = cfg_of(Dialect::kAmd,
                          ".kernel k\n global_load_dword v1, v0, off\n s_waitcnt vmcnt(0)\n"
                          " global_load_dword v2, v0, off\n s_waitcnt vmcnt(0)\n");
  EXPECT_EQ(pairs(trace_waitcnt(cfg)), (Pairs{{0, 1}, {2, 3}}));
}

TEST(TraceWaitcnt, PartialWaitRetiresOldest) {
  const auto cfg = cfg_of(Dialect::kAmd,
                          ".kernel k\n global_load_dword v1, v0, off\n global_load_dword v2, v0, off\n"
                          " global_load_dword v3, v0, off\n s_waitcnt vmcnt(1)\n"
                          " global_load_dword v4, v0, off\n s_waitcnt vmcnt(0)\n");
  EXPECT_EQ(pairs(trace_waitcnt(cfg)), (Pairs{{0, 3}, {1, 3}, {2, 5}, {4, 5}}));
}

TEST(TraceWaitcnt, CountersAreSeparate) {
  const auto cfg = cfg_of(Dialect::kAmd,
                          ".kernel k\n global_load_dword v1, v0, off\n ds_read_b32 v2, v0\n"
                          " s_load_dword s4, s[0:1], 0x0\n s_waitcnt lgkmcnt(0)\n s_waitcnt vmcnt(0)\n");
  EXPECT_EQ(pairs(trace_waitcnt(cfg)), (Pairs{{1, 3}, {2, 3}, {0, 4}}));
}

TEST(TraceWaitcnt, StoresAndAtomicsCountOnVmcnt) {
  const auto cfg = cfg_of(Dialect::kAmd,
                          ".kernel k\n global_store_dword v0, v1, off\n global_atomic_add v0, v1, off\n"
                          " s_waitcnt vmcnt(0)\n");
  EXPECT_EQ(pairs(trace_waitcnt(cfg)), (Pairs{{0, 2}, {1, 2}}));
}

TEST(TraceWaitcnt, MergeUnionsChains) {
  const auto cfg = cfg_of(Dialect::kAmd,
                          ".kernel k\n"
                          "/*0000*/ s_cbranch_scc1 OTHER\n"
                          "/*0004*/ global_load_dword v1, v0, off\n"
                          "/*0008*/ global_load_dword v2, v0, off\n"
                          "/*000c*/ s_branch JOIN\n"
                          "OTHER:\n"
                          "/*0010*/ global_load_dword v3, v0, off\n"
                          "JOIN:\n"
                          "/*0014*/ s_waitcnt vmcnt(1)\n");
  // Left chain: 2 pending, 1 edge. Right chain: 1 pending, none.
  EXPECT_EQ(pairs(trace_waitcnt(cfg)), (Pairs{{1, 5}}));
}

TEST(TraceWaitcnt, UnderflowDiagnosed) {
  const auto cfg = cfg_of(Dialect::kAmd, ".kernel k\n global_load_dword v1, v0, off\n s_waitcnt vmcnt(3)\n");
  const auto r = trace_waitcnt(cfg);
  EXPECT_TRUE(r.edges.empty());
  ASSERT_EQ(r.diagnostics.size(), 1u);
  EXPECT_EQ(r.diagnostics[0].kind, DiagnosticKind::kWaitcntUnderflow);
}

TEST(TraceWaitcnt, ScanCap) {
  const auto cfg = cfg_of(Dialect::kAmd,
                          ".kernel k\n global_load_dword v1, v0, off\n v_mov_b32 v5, v6\n v_mov_b32 v5, v6\n"
                          " v_mov_b32 v5, v6\n s_waitcnt vmcnt(0)\n");
  const auto r = trace_waitcnt(cfg, 2);
  ASSERT_FALSE(r.diagnostics.empty());
  EXPECT_EQ(r.diagnostics[0].kind, DiagnosticKind::kScanCap);
}

TEST(TraceWaitcnt, LoopCarried) {
  const auto cfg = cfg_of(Dialect::kAmd,
                          ".kernel k\n"
                          "TOP:\n"
                          "/*0000*/ s_waitcnt vmcnt(0)\n"
                          "/*0004*/ global_load_dword v1, v0, off\n"
                          "/*0008*/ s_cbranch_scc1 TOP\n"
                          "/*000c*/ s_endpgm\n");
  EXPECT_EQ(pairs(trace_waitcnt(cfg)), (Pairs{{1, 0}}));
}

TEST(TraceBarriers, SetterToWaiter) {
  const auto cfg = cfg_of(Dialect::kNvidia, ".kernel k\n LDG.E R0, [R2] {write=B1}\n DFMA R4, R0, R6, R4 {wait=B1}\n");
  const auto r = trace_barriers(cfg);
  EXPECT_EQ(pairs(r), (Pairs{{0, 1}}));
  EXPECT_EQ(r.edges[0].kind, EdgeKind::kMemBarrier);
}

TEST(TraceBarriers, NearestSetterWins) {
  const auto cfg = cfg_of(Dialect::kNvidia,
                          ".kernel k\n LDG.E R0, [R2] {write=B1}\n LDG.E R1, [R2] {write=B1}\n FADD R4, R0, R1 {wait=B1}\n");
  EXPECT_EQ(pairs(trace_barriers(cfg)), (Pairs{{1, 2}}));
}

TEST(TraceBarriers, MissingSetter) {
  const auto cfg = cfg_of(Dialect::kNvidia, ".kernel k\n FADD R4, R0, R1 {wait=B3}\n");
  const auto r = trace_barriers(cfg);
  EXPECT_TRUE(r.edges.empty());
  ASSERT_EQ(r.diagnostics.size(), 1u);
  EXPECT_EQ(r.diagnostics[0].kind, DiagnosticKind::kMissingBarrierSetter);
}

TEST(TraceBarriers, ReadSetAndDepbar) {
  const auto cfg = cfg_of(Dialect::kNvidia,
                          ".kernel k\n STG.E [R2], R0 {read=B2}\n LDG.E R1, [R4] {write=B4}\n DEPBAR {depbar=B2,B4}\n");
  EXPECT_EQ(pairs(trace_barriers(cfg)), (Pairs{{0, 2}, {1, 2}}));
}

TEST(TraceBarriers, PerPathNearestSetter) {
  const auto cfg = cfg_of(Dialect::kNvidia,
                          ".kernel k\n"
                          "/*0000*/ LDG.E R0, [R2] {write=B1}\n"
                          "/*0010*/ @P0 BRA JOIN\n"
                          "/*0020*/ LDG.E R1, [R2] {write=B1}\n"
                          "JOIN:\n"
                          "/*0030*/ FADD R4, R0, R1 {wait=B1}\n");
  EXPECT_EQ(pairs(trace_barriers(cfg)), (Pairs{{0, 3}, {2, 3}}));
}

TEST(TraceSwsb, SetterToWaiter) {
  const auto cfg = cfg_of(Dialect::kIntel, ".kernel k\n send.dc0 r10 r4 {sbid.set=5}\n mad (8|M0) r12 r10 r2 r3 {sbid.wait.dst=5}\n");
  const auto r = trace_swsb(cfg);
  EXPECT_EQ(pairs(r), (Pairs{{0, 1}}));
  EXPECT_EQ(r.edges[0].kind, EdgeKind::kMemSwsb);
}

TEST(TraceSwsb, ResetTokenNearestWins) {
  const auto cfg = cfg_of(Dialect::kIntel,
                          ".kernel k\n send.dc0 r10 r4 {sbid.set=5}\n send.dc0 r11 r4 {sbid.set=5}\n"
                          " add (8|M0) r12 r10 r11 {sbid.wait.dst=5}\n");
  EXPECT_EQ(pairs(trace_swsb(cfg)), (Pairs{{1, 2}}));
}

TEST(TraceSwsb, PerToken) {
  const auto cfg = cfg_of(Dialect::kIntel,
                          ".kernel k\n send.dc0 r10 r4 {sbid.set=3}\n send.dc0 r11 r4 {sbid.set=7}\n"
                          " add (8|M0) r12 r10 r11 {sbid.wait.dst=3,7}\n");
  EXPECT_EQ(pairs(trace_swsb(cfg)), (Pairs{{0, 2}, {1, 2}}));
}

TEST(TraceSwsb, SrcWaitAndMissingSetter) {
  const auto cfg = cfg_of(Dialect::kIntel,
                          ".kernel k\n send.dc0 r10 r4 {sbid.set=2}\n mov (8|M0) r4 r9 {sbid.wait.src=2}\n"
                          " add (8|M0) r12 r10 r11 {sbid.wait.dst=9}\n");
  const auto r = trace_swsb(cfg);
  EXPECT_EQ(pairs(r), (Pairs{{0, 1}}));
  ASSERT_EQ(r.diagnostics.size(), 1u);
  EXPECT_EQ(r.diagnostics[0].kind, DiagnosticKind::kMissingSbidSetter);
}

TEST(TraceSync, DialectChecks) {
  const auto amd = cfg_of(Dialect::kAmd, ".kernel k\n s_waitcnt vmcnt(0)\n");
  EXPECT_THROW(trace_barriers(amd), InputError);
  EXPECT_THROW(trace_swsb(amd), InputError);
  const auto nv = cfg_of(Dialect::kNvidia, ".kernel k\n EXIT\n");
  EXPECT_THROW(trace_waitcnt(nv), InputError);
  EXPECT_NO_THROW(trace_sync(nv));
}

}  // namespace
}  // namespace stallslice
