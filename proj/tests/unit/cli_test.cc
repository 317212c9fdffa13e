// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cli.h"
#include "fixtures.h"

namespace stallslice::cli {
namespace {

using stallslice::testing::data_path;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> analyze_args(const std::string& vendor) {
  return {"analyze", "--vendor", vendor, "--disasm", data_path("ltimes/" + vendor + ".s"), "--profile",
          data_path("ltimes/" + vendor + ".prof.json")};
}

std::string temp_file(const std::string& name, const std::string& text) {
  const std::string path = ::testing::TempDir() + name;
  std::ofstream(path) << text;
  return path;
}

TEST(Cli, AnalyzeText) {
  const auto r = invoke(analyze_args("nvidia"));
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out.rfind("kernel ltimes_noview (nvidia)", 0), 0u);
  EXPECT_NE(r.out.find("#1  0x0050  DFMA"), std::string::npos) << r.out;
  EXPECT_TRUE(r.err.empty());
}

TEST(Cli, GoldenText) {
  const auto r = invoke(analyze_args("nvidia"));
  EXPECT_EQ(r.out, stallslice::testing::read_data("golden/ltimes_nvidia.txt"));
}

TEST(Cli, StructuredEchoesStages) {
  auto args = analyze_args("amd");
  for (const char* a : {"--format", "structured", "--stages", "1,3"}) args.push_back(a);
  const auto r = invoke(args);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("\"stages\": \"1,3\""), std::string::npos);
  EXPECT_NE(r.out.find("\"format\": \"stallslice-report/1\""), std::string::npos);
}

TEST(Cli, ConfigFileAndOverride) {
  const auto cfg = temp_file("stallslice_cli.cfg", "stages = 2\ntop = 1\n");
  auto args = analyze_args("intel");
  args.insert(args.end(), {"--config", cfg, "--stages", "1,2"});
  const auto r = invoke(args);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("(stages 1,2)"), std::string::npos) << r.out;
  EXPECT_EQ(r.out.find("#2 "), std::string::npos);
}

TEST(Cli, UnknownFlag) {
  auto args = analyze_args("nvidia");
  args.push_back("--frobnicate");
  const auto r = invoke(args);
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("stallslice:"), std::string::npos);
}

TEST(Cli, MissingFileNamesPath) {
  const auto r = invoke({"analyze", "--vendor", "amd", "--disasm", "/nonexistent/x.s", "--profile", "p.json"});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("/nonexistent/x.s"), std::string::npos) << r.err;
}

TEST(Cli, VendorMismatch) {
  auto args = analyze_args("nvidia");
  args[6] = data_path("ltimes/amd.prof.json");
  const auto r = invoke(args);
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST(Cli, UnknownVendor) {
  const auto r = invoke({"analyze", "--vendor", "arm", "--disasm", "x.s", "--profile", "p.json"});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("unknown vendor 'arm'"), std::string::npos);
}

TEST(Cli, SyntaxErrorLocation) {
  const auto bad = temp_file("stallslice_bad.s", ".kernel k\nFADD R1, R2, R3 {bogus=1}\n");
  const auto r = invoke({"dump-graph", "--vendor", "nvidia", "--disasm", bad});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("stallslice_bad.s:2:"), std::string::npos) << r.err;
}

TEST(Cli, KernelFilter) {
  auto args = analyze_args("nvidia");
  args.push_back("--kernel");
  args.push_back("nope");
  const auto r = invoke(args);
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("ltimes_noview"), std::string::npos) << r.err;
  args.back() = "ltimes_noview";
  EXPECT_EQ(invoke(args).code, kExitOk);
}

TEST(Cli, DumpGraphPhases) {
  const auto r = invoke({"dump-graph", "--vendor", "amd", "--disasm", data_path("sync/amd/three_loads_vmcnt1.s"),
                         "--phase", "pre"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("0x0000 -> 0x000c kind=mem_waitcnt reg=- class=memory"), std::string::npos) << r.out;
  EXPECT_EQ(r.out.find("# pruned"), std::string::npos);
}

TEST(Cli, SdcAndChain) {
  auto sdc = analyze_args("amd");
  sdc[0] = "sdc";
  const auto s = invoke(sdc);
  ASSERT_EQ(s.code, kExitOk) << s.err;
  EXPECT_EQ(s.out.rfind("ltimes_noview: before ", 0), 0u) << s.out;

  auto chain = analyze_args("amd");
  chain[0] = "chain";
  chain.push_back("--at");
  chain.push_back("0x14");
  const auto c = invoke(chain);
  ASSERT_EQ(c.code, kExitOk) << c.err;
  EXPECT_NE(c.out.find("<- 0x0008"), std::string::npos) << c.out;

  chain.back() = "0x15";
  EXPECT_EQ(invoke(chain).code, kExitInput);
  chain.back() = "zz";
  EXPECT_EQ(invoke(chain).code, kExitInput);
}

TEST(Cli, Help) {
  const auto r = invoke({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("analyze"), std::string::npos);
}

}  // namespace
}  // namespace stallslice::cli
