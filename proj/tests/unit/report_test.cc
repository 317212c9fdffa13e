// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "fixtures.h"
#include "generator.h"
#include "stallslice/pipeline.h"
#include "stallslice/report.h"

namespace stallslice {
namespace {

using testing::annotate;
using testing::profile_json;

KernelAnalysis run(Dialect d, const std::string& listing, const std::vector<testing::SampleSpec>& samples,
                   AnalysisOptions options = {}) {
  return analyze(annotate(d, listing, samples.empty() ? "" : profile_json("k", d, 4, samples)), options);
}

constexpr const char* kListing =
    ".kernel k\n"
    "/*0000*/ LDG.E R0, [R2.64] {write=B1}  // k.cu:10\n"
    "/*0010*/ IADD3 R5, R6, R7, RZ\n"
    "/*0020*/ FMUL R4, R0, R5 {wait=B1}  // k.cu:12 <- main.cu:3\n"
    "/*0030*/ STG.E [R8], R4\n"
    "/*0040*/ EXIT\n";

TEST(Rank, SingleHotspotTakesWholeKernel) {
  const auto a = run(Dialect::kNvidia, kListing, {{0x20, {{"memory dependency", 25}}}});
  ASSERT_EQ(a.report.hotspots.size(), 1u);
  const auto& h = a.report.hotspots[0];
  EXPECT_EQ(h.offset, 0x20u);
  EXPECT_DOUBLE_EQ(h.stall_cycles, 100.0);
  EXPECT_DOUBLE_EQ(h.share_percent, 100.0);
  EXPECT_EQ(h.mnemonic, "FMUL");
  ASSERT_TRUE(h.src_loc);
  EXPECT_EQ(h.src_loc->file, "k.cu");
  EXPECT_EQ(h.breakdown, (std::vector<std::pair<std::string, uint64_t>>{{"memory_dep", 25}}));
}

TEST(Rank, OrderAndShares) {
  const auto a = run(Dialect::kNvidia, kListing,
                     {{0x20, {{"memory dependency", 3}}}, {0x30, {{"execution dependency", 97}}}});
  ASSERT_EQ(a.report.hotspots.size(), 2u);
  EXPECT_EQ(a.report.hotspots[0].offset, 0x30u);
  EXPECT_DOUBLE_EQ(a.report.hotspots[0].share_percent, 97.0);
  EXPECT_DOUBLE_EQ(a.report.hotspots[1].share_percent, 3.0);
  EXPECT_TRUE(rank_hotspots(a.pruned.graph, a.blame, 0, 16).empty());
  EXPECT_EQ(rank_hotspots(a.pruned.graph, a.blame, 1, 16).size(), 1u);
}

TEST(Rank, TiesBreakByOffset) {
  const auto a = run(Dialect::kNvidia, kListing,
                     {{0x30, {{"execution dependency", 5}}}, {0x20, {{"memory dependency", 5}}}});
  EXPECT_EQ(a.report.hotspots[0].offset, 0x20u);
}

TEST(Rank, CausePercentagesSumToHundred) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 40; ++i) {
    const auto listing = testing::random_listing(Dialect::kNvidia, rng, {});
    const auto cfg = testing::cfg_of(Dialect::kNvidia, listing);
    const auto prof = testing::random_profile(cfg, rng, {});
    const auto a = analyze(annotate(cfg, &prof), AnalysisOptions{});
    for (const auto& h : a.report.hotspots) {
      double sum = 0.0;
      for (const auto& c : h.causes) sum += c.percent;
      EXPECT_NEAR(sum, 100.0, 0.01);
      for (size_t k = 1; k < h.causes.size(); ++k) EXPECT_GE(h.causes[k - 1].blame_cycles, h.causes[k].blame_cycles);
    }
  }
}

TEST(Report, CausesAndChain) {
  const auto a = run(Dialect::kNvidia, kListing,
                     {{0x0, {}, 8}, {0x20, {{"memory dependency", 25}}}, {0x30, {{"execution dependency", 5}}}});
  const auto& h = a.report.hotspots[0];
  EXPECT_EQ(h.offset, 0x20u);
  ASSERT_FALSE(h.causes.empty());
  EXPECT_EQ(h.causes[0].producer_offset, 0x0u);
  EXPECT_EQ(h.causes[0].producer_mnemonic, "LDG.E");
  EXPECT_DOUBLE_EQ(h.causes[0].percent, 100.0 * h.causes[0].blame_cycles / h.stall_cycles);
  ASSERT_GE(h.chain.size(), 2u);
  EXPECT_EQ(h.chain[0].offset, 0x20u);
  EXPECT_EQ(h.chain[1].offset, 0x0u);
  EXPECT_FALSE(h.chain[1].via.empty());
  // Walks from the store go through the multiply first.
  const auto& store = a.report.hotspots[1];
  ASSERT_GE(store.chain.size(), 2u);
  EXPECT_EQ(store.chain[1].offset, 0x20u);
  EXPECT_EQ(store.chain[1].via, "raw");
  EXPECT_EQ(store.chain[1].reg, "R4");
}

TEST(Report, TextLayout) {
  const auto a = run(Dialect::kNvidia, kListing, {{0x0, {}, 8}, {0x20, {{"memory dependency", 25}}}});
  const auto text = render_text(a.report);
  EXPECT_EQ(text.rfind("kernel k (nvidia), sampling period 4 cycles\n", 0), 0u) << text;
  EXPECT_NE(text.find("total stall cycles: 100 over 2 sampled of 5 instructions\n"), std::string::npos) << text;
  EXPECT_NE(text.find("#1  0x0020  FMUL  k.cu:12"), std::string::npos) << text;
  EXPECT_NE(text.find("stall cycles: 100 (100.0% of kernel)"), std::string::npos) << text;
  EXPECT_NE(text.find("stall breakdown: memory_dep 100.0%"), std::string::npos) << text;
  EXPECT_NE(text.find("single-dependency coverage: "), std::string::npos);
  EXPECT_EQ(text.find("no samples"), std::string::npos);
}

TEST(Report, NoSamplesNotice) {
  const auto a = run(Dialect::kNvidia, kListing, {});
  const auto text = render_text(a.report);
  EXPECT_NE(text.find("no samples: nothing to attribute"), std::string::npos);
  EXPECT_TRUE(a.report.hotspots.empty());
  EXPECT_DOUBLE_EQ(a.report.total_stall_cycles, 0.0);
}

TEST(Report, DiagnosticsSection) {
  const auto a = run(Dialect::kNvidia, ".kernel k\n/*0000*/ FADD R1, R2, R3\n/*0010*/ EXIT\n",
                     {{0x0, {{"other", 1}}}, {0x80, {{"other", 2}}}});
  const auto text = render_text(a.report);
  EXPECT_NE(text.find("\ndiagnostics ("), std::string::npos) << text;
  EXPECT_NE(text.find("skid 0x0080"), std::string::npos) << text;
  EXPECT_NE(text.find("unresolved_use 0x0000"), std::string::npos) << text;
}

TEST(Report, StructuredRoundTrip) {
  std::mt19937_64 rng(5);
  std::vector<StallReport> reports;
  for (Dialect d : {Dialect::kNvidia, Dialect::kAmd, Dialect::kIntel}) {
    for (int i = 0; i < 4; ++i) {
      const auto listing = testing::random_listing(d, rng, {}, "k" + std::to_string(i));
      const auto cfg = testing::cfg_of(d, listing);
      const auto prof = testing::random_profile(cfg, rng, {});
      reports.push_back(analyze(annotate(cfg, &prof), AnalysisOptions{}).report);
    }
  }
  reports.push_back(run(Dialect::kNvidia, kListing, {{0x0, {}, 8}, {0x20, {{"memory dependency", 25}}}}).report);
  const auto doc = render_structured(reports);
  const auto back = parse_structured(doc);
  EXPECT_EQ(render_structured(back), doc);
  ASSERT_EQ(back.size(), reports.size());
  for (size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].hotspots.size(), reports[i].hotspots.size());
    EXPECT_EQ(back[i].diagnostics, reports[i].diagnostics);
    EXPECT_EQ(back[i].config, reports[i].config);
  }
}

TEST(Report, StructuredIsDeterministic) {
  const auto one = render_structured(run(Dialect::kNvidia, kListing, {{0x20, {{"memory dependency", 25}}}}).report);
  const auto two = render_structured(run(Dialect::kNvidia, kListing, {{0x20, {{"memory dependency", 25}}}}).report);
  EXPECT_EQ(one, two);
  EXPECT_EQ(one.rfind("{\n  \"format\": \"stallslice-report/1\"", 0), 0u);
}

TEST(Report, ParseRejectsMalformed) {
  for (const char* bad : {"", "[]", "{\"format\":\"other/1\",\"reports\":[]}", "{\"format\":\"stallslice-report/1\"}",
                          "{\"format\":\"stallslice-report/1\",\"reports\":[{\"kernel\":1}]}"}) {
    EXPECT_THROW(parse_structured(bad), InputError) << bad;
  }
}

TEST(Report, ConfigEcho) {
  AnalysisOptions o;
  o.prune.stages = std::bitset<4>(0b0011);
  const auto echo = echo_config(o, Dialect::kAmd);
  EXPECT_EQ(echo.stages, "1,2");
  EXPECT_EQ(echo.latency_table.size(), static_cast<size_t>(kOpcodeClassCount));
  const auto a = run(Dialect::kNvidia, kListing, {{0x20, {{"memory dependency", 25}}}}, o);
  EXPECT_NE(render_text(a.report).find("(stages 1,2)"), std::string::npos);
}

TEST(Report, ChainAndCoverageOutputs) {
  const auto a = run(Dialect::kNvidia, kListing, {{0x0, {}, 8}, {0x20, {{"memory dependency", 25}}}});
  const ChainReport chain{"k", chain_view(a.pruned.graph, a.blame, 2, 16)};
  const auto text = render_chain_text({chain});
  EXPECT_NE(text.find("0x0020  FMUL"), std::string::npos) << text;
  EXPECT_NE(text.find("<- 0x0000  LDG.E"), std::string::npos) << text;
  EXPECT_NE(render_chain_structured({chain}).find("\"stallslice-chain/1\""), std::string::npos);
  const CoverageReport cov{"k", a.report.sdc_before, a.report.sdc_after};
  EXPECT_EQ(render_coverage_text({cov}).rfind("k: before ", 0), 0u);
  EXPECT_NE(render_coverage_structured({cov}).find("\"stallslice-coverage/1\""), std::string::npos);
}

}  // namespace
}  // namespace stallslice
