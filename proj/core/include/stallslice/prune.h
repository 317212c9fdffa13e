// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// Edge pruning. Each stage is a pure graph -> graph transform that also
// returns the edges it removed. Sync edges (mem_*) are never pruned.

#pragma once

#include <array>
#include <bitset>
#include <string>
#include <vector>

#include "stallslice/depgraph.h"
#include "stallslice/error.h"
#include "stallslice/isa.h"

namespace stallslice {

// Per-class hidden-latency thresholds: cycles on NVIDIA, instruction counts
// on AMD and Intel.
struct LatencyTable {
  std::array<double, kOpcodeClassCount> thresholds{};

  static LatencyTable defaults(Dialect dialect);
  double at(OpcodeClass cls) const { return thresholds[static_cast<size_t>(cls)]; }
  void set(OpcodeClass cls, double value) { thresholds[static_cast<size_t>(cls)] = value; }

  bool operator==(const LatencyTable&) const = default;
};

struct StageResult {
  DependencyGraph graph;
  std::vector<DepEdge> removed;
  Diagnostics diagnostics;
};

// Stage 1: a destination whose stalls are all memory_dep drops raw/guard
// edges from compute producers; one whose stalls are all execution_dep drops
// raw/guard edges from global loads. Unsampled destinations keep everything.
StageResult prune_opcode(const DependencyGraph& graph);

// Stage 2 (NVIDIA only): drops a raw/guard edge when the producer sets
// barriers and the consumer waits on none of them.
StageResult prune_barrier(const DependencyGraph& graph);

// Issue cycles charged for `inst` while walking a path.
double issue_cycles(const Instruction& inst);

inline constexpr size_t kDefaultMaxPaths = 64;
inline constexpr size_t kDefaultMaxDepth = 512;

// Stage 3: walks CFG paths from producer to consumer, each back edge taken at
// most once. A path accumulates the issue cycles of the instructions strictly
// between producer and consumer and is dropped once that exceeds the
// producer's threshold. Edges with no surviving path are removed; survivors
// record their paths. Hitting a cap keeps the edge and reports it.
StageResult prune_latency(const DependencyGraph& graph, const LatencyTable& table,
                          size_t max_paths = kDefaultMaxPaths, size_t max_depth = kDefaultMaxDepth);

// Stage 4: drops raw/guard edges whose producer has an explicit exec_count
// of zero. Identity when disabled.
StageResult prune_execution(const DependencyGraph& graph, bool enabled);

struct PruneOptions {
  std::bitset<4> stages{0b1111};  // bit k = stage k+1
  bool prune_exec = false;
  size_t max_paths = kDefaultMaxPaths;
  size_t max_depth = kDefaultMaxDepth;
  std::array<LatencyTable, 3> tables{LatencyTable::defaults(Dialect::kNvidia),
                                     LatencyTable::defaults(Dialect::kAmd),
                                     LatencyTable::defaults(Dialect::kIntel)};

  const LatencyTable& table(Dialect d) const { return tables[static_cast<size_t>(d)]; }
  LatencyTable& table(Dialect d) { return tables[static_cast<size_t>(d)]; }
  bool stage_enabled(int stage) const { return stages.test(static_cast<size_t>(stage - 1)); }
  std::string stage_list() const;  // "1,2,3,4"
};

struct PruneResult {
  DependencyGraph graph;
  std::array<std::vector<DepEdge>, 4> removed;
  Diagnostics diagnostics;
};

// Runs the enabled stages in order 1 -> 4.
PruneResult prune(const DependencyGraph& graph, const PruneOptions& options);

}  // namespace stallslice
