// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>

#include "fixtures.h"
#include "generator.h"
#include "stallslice/disasm.h"
#include "stallslice/pipeline.h"

namespace stallslice {
namespace {

struct Input {
  std::string listing;
  KernelProfile profile;
};

Input make_input(Dialect d, size_t instructions) {
  std::mt19937_64 rng(7);
  testing::GenSpec spec;
  spec.max_instructions = instructions;
  spec.max_blocks = std::max<size_t>(1, instructions / 12);
  spec.registers = 64;
  spec.exact = true;
  testing::ProfileSpec pspec;
  pspec.total_samples = instructions * 5;
  Input in;
  in.listing = testing::random_listing(d, rng, spec, "bench");
  in.profile = testing::random_profile(testing::cfg_of(d, in.listing), rng, pspec);
  return in;
}

void BM_Parse(benchmark::State& state) {
  const auto in = make_input(Dialect::kNvidia, static_cast<size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(parse_listing(Dialect::kNvidia, in.listing, {nullptr, "bench.s"}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Parse)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_BuildGraph(benchmark::State& state) {
  const Dialect d = static_cast<Dialect>(state.range(1));
  const auto in = make_input(d, static_cast<size_t>(state.range(0)));
  const auto kernel = testing::annotate(testing::cfg_of(d, in.listing), &in.profile);
  for (auto _ : state) benchmark::DoNotOptimize(build_graph(kernel));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildGraph)->ArgsProduct({{1000, 10000}, {0, 1, 2}})->Unit(benchmark::kMillisecond);

void BM_Prune(benchmark::State& state) {
  const auto in = make_input(Dialect::kNvidia, static_cast<size_t>(state.range(0)));
  const auto graph = build_graph(testing::annotate(testing::cfg_of(Dialect::kNvidia, in.listing), &in.profile));
  for (auto _ : state) benchmark::DoNotOptimize(prune(graph, PruneOptions{}));
}
BENCHMARK(BM_Prune)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Analyze(benchmark::State& state) {
  const auto in = make_input(Dialect::kAmd, static_cast<size_t>(state.range(0)));
  const auto kernel = testing::annotate(testing::cfg_of(Dialect::kAmd, in.listing), &in.profile);
  for (auto _ : state) benchmark::DoNotOptimize(analyze(kernel, AnalysisOptions{}));
}
BENCHMARK(BM_Analyze)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace stallslice
BENCHMARK_MAIN();
