// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "fixtures.h"
#include "generator.h"
#include "stallslice/cfg.h"

namespace stallslice {
namespace {

using testing::cfg_of;

TEST(BuildCfg, StraightLineIsOneBlock) {
  const auto cfg = cfg_of(Dialect::kNvidia, ".kernel k\n MOV R0, R1\n MOV R2, R0\n MOV R3, R2\n");
  ASSERT_EQ(cfg.blocks.size(), 1u);
  EXPECT_TRUE(cfg.blocks[0].succs.empty());
  EXPECT_EQ(cfg.blocks[0].last_index, 2u);
}

TEST(BuildCfg, ConditionalSkip) {
  const auto cfg = cfg_of(Dialect::kAmd, ".kernel k\n s_cbranch_scc1 L1\n v_mov_b32 v0, v1\nL1:\n v_mov_b32 v2, v0\n");
  ASSERT_EQ(cfg.blocks.size(), 3u);
  const uint32_t bl1 = cfg.block_of[2], ba = cfg.block_of[1];
  EXPECT_EQ(cfg.blocks[0].succs.size(), 2u);
  EXPECT_NE(std::find(cfg.blocks[0].succs.begin(), cfg.blocks[0].succs.end(), bl1), cfg.blocks[0].succs.end());
  EXPECT_NE(std::find(cfg.blocks[0].succs.begin(), cfg.blocks[0].succs.end(), ba), cfg.blocks[0].succs.end());
  EXPECT_EQ(cfg.blocks[ba].succs, std::vector<uint32_t>{bl1});
}

TEST(BuildCfg, LoopBackEdge) {
  const auto cfg = cfg_of(Dialect::kNvidia, ".kernel k\nL0:\n IADD3 R0, R0, 0x1, RZ\n ISETP.LT.AND P0, PT, R0, R1, PT\n @P0 BRA L0\n EXIT\n");
  ASSERT_EQ(cfg.blocks.size(), 2u);
  const auto& succs = cfg.blocks[0].succs;
  EXPECT_NE(std::find(succs.begin(), succs.end(), 0u), succs.end());
  EXPECT_NE(std::find(succs.begin(), succs.end(), 1u), succs.end());
  EXPECT_TRUE(cfg.blocks[1].succs.empty());
}

TEST(BuildCfg, UnconditionalBranchAndTerminators) {
  const auto cfg = cfg_of(Dialect::kIntel, ".kernel k\n jmpi L2\n add (8|M0) r1 r2 r3\nL2:\n ret\n add (8|M0) r4 r5 r6\n");
  ASSERT_EQ(cfg.blocks.size(), 4u);
  EXPECT_EQ(cfg.blocks[0].succs, std::vector<uint32_t>{2u});
  EXPECT_TRUE(cfg.blocks[2].succs.empty());
  EXPECT_FALSE(cfg.reachable[1]);
  EXPECT_FALSE(cfg.reachable[3]);
  EXPECT_EQ(cfg.unreachable_diagnostics().size(), 2u);
}

TEST(BuildCfg, CallFallsThrough) {
  const auto cfg = cfg_of(Dialect::kNvidia, ".kernel k\n CALL fn\n MOV R0, R1\n EXIT\n");
  ASSERT_EQ(cfg.blocks.size(), 2u);
  EXPECT_EQ(cfg.blocks[0].succs, std::vector<uint32_t>{1u});
}

TEST(BuildCfg, UnknownLabelIsAnError) {
  EXPECT_THROW(cfg_of(Dialect::kNvidia, ".kernel k\n BRA NOWHERE\n"), InputError);
}

TEST(BuildCfg, StructuralInvariants) {
  std::mt19937_64 rng(3);
  for (auto d : {Dialect::kNvidia, Dialect::kAmd, Dialect::kIntel}) {
    for (int n = 0; n < 100; ++n) {
      const auto cfg = cfg_of(d, testing::random_listing(d, rng, {}));
      size_t next = 0;
      for (const auto& b : cfg.blocks) {
        EXPECT_EQ(b.first_index, next);
        next = b.last_index + 1;
        for (uint32_t s : b.succs) {
          const auto& p = cfg.blocks[s].preds;
          EXPECT_NE(std::find(p.begin(), p.end(), b.id), p.end());
        }
        for (uint32_t p : b.preds) {
          const auto& s = cfg.blocks[p].succs;
          EXPECT_NE(std::find(s.begin(), s.end(), b.id), s.end());
        }
        const Instruction& last = cfg.instructions[b.last_index];
        EXPECT_TRUE(b.succs.size() < 2 || last.opcode_class == OpcodeClass::kControlFlow);
        EXPECT_TRUE(!b.succs.empty() || last.control == ControlKind::kReturn || b.id + 1 == cfg.blocks.size());
      }
      EXPECT_EQ(next, cfg.instructions.size());
      EXPECT_EQ(cfg.block_of[0], cfg.entry);
      EXPECT_TRUE(cfg.reachable[cfg.entry]);
    }
  }
}

}  // namespace
}  // namespace stallslice
