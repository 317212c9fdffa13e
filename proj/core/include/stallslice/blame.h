// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// Stall-cycle attribution over a pruned dependency graph. For a stalled
// instruction j with stall cycles S_j and surviving incoming edges i:
//
//   blame_i = S_j * p_i / sum_k p_k,   p_i = R_dist * R_eff * R_isu * R_match
//
//   R_dist  = d_min / d_i    d_i: mean valid-path length (stream distance for
//                            edges without recorded paths)
//   R_eff   = e_min / e_i    e_i: producer efficiency, default 1
//   R_isu   = n_i / sum n_k  n_i: producer exec_count, else total samples, else 1
//   R_match = share of j's latency samples in the edge's dependency class

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stallslice/depgraph.h"

namespace stallslice {

enum class SelfBlameSubcategory {
  kMemoryLatency,
  kComputeSaturation,
  kSynchronizationOverhead,
  kPipelineContention,
  kInstructionFetch,
  kIndirectAddressing,
};

const char* to_string(SelfBlameSubcategory s);
std::optional<SelfBlameSubcategory> self_blame_from_string(std::string_view s);

struct BlameFactors {
  double dist = 1.0;
  double eff = 1.0;
  double isu = 1.0;
  double match = 1.0;

  double product() const { return dist * eff * isu * match; }

  bool operator==(const BlameFactors&) const = default;
};

struct BlameEntry {
  size_t stalled = 0;
  std::optional<size_t> cause;  // nullopt: SELF
  std::variant<EdgeKind, SelfBlameSubcategory> kind = EdgeKind::kRaw;
  std::optional<RegisterRef> reg;
  double blame_cycles = 0.0;
  std::optional<BlameFactors> factors;  // absent for SELF

  bool is_self() const { return !cause.has_value(); }

  bool operator==(const BlameEntry&) const = default;
};

// Common stall class an edge's dependency class is matched against. Sync
// edges also match synchronization stalls (Intel reports SBID waits there).
double match_fraction(const DepEdge& edge, const NodeMetrics& consumer);

// d_i for one edge.
double edge_distance(const DependencyGraph& graph, const DepEdge& edge);

// Entries grouped by stalled instruction (ascending), each group in
// canonical edge order. Instructions with S_j = 0 get no entries.
std::vector<BlameEntry> attribute_blame(const DependencyGraph& graph);

// Dominant common stall class of `m` mapped to a subcategory. Ties go to the
// class listed first in CommonStallClass. Memory-dominated instructions whose
// address registers come from loads are indirect_addressing.
SelfBlameSubcategory classify_self_blame(const NodeMetrics& m, bool address_from_load);

// Uses the unpruned edges of `graph` for the address check.
BlameEntry self_blame(const DependencyGraph& graph, size_t instruction);

struct ChainHop {
  size_t instruction = 0;
  std::optional<EdgeKind> via;     // edge into the previous hop; absent at the start
  std::optional<RegisterRef> reg;  // register of that edge
  double blame_cycles = 0.0;       // blame carried by that edge (S_j at the start)
  double share = 1.0;              // blame_cycles / S of the previous hop
  std::optional<SelfBlameSubcategory> self;  // set when this hop is self-blamed

  bool operator==(const ChainHop&) const = default;
};

// Greedy backward walk along the highest-blame cause (ties: smaller producer
// offset). Stops at SELF, at an instruction with no entries, on revisiting
// an instruction, or after `max_depth` hops. Throws InputError when `start`
// is not an instruction of the graph.
std::vector<ChainHop> trace_chain(const DependencyGraph& graph, const std::vector<BlameEntry>& blame,
                                  size_t start, size_t max_depth);

}  // namespace stallslice
