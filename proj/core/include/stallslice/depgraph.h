// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stallslice/dataflow.h"
#include "stallslice/error.h"
#include "stallslice/isa.h"
#include "stallslice/profile.h"

namespace stallslice {

enum class EdgeKind { kRaw, kGuard, kMemWaitcnt, kMemBarrier, kMemSwsb };

const char* to_string(EdgeKind kind);
std::optional<EdgeKind> edge_kind_from_string(std::string_view s);
bool is_sync_kind(EdgeKind kind);

enum class DepClass { kMemory, kExecution, kSynchronization };

const char* to_string(DepClass cls);
std::optional<DepClass> dep_class_from_string(std::string_view s);

// memory for sync edges and load-like producers, synchronization for
// barrier_all producers, execution otherwise.
DepClass classify_edge(EdgeKind kind, OpcodeClass producer);

struct PathRecord {
  uint32_t length_instructions = 0;
  double accumulated_issue_cycles = 0.0;

  bool operator==(const PathRecord&) const = default;
};

// Stored producer -> consumer; backward slicing walks incoming edges.
struct DepEdge {
  size_t producer = 0;
  size_t consumer = 0;
  EdgeKind kind = EdgeKind::kRaw;
  std::optional<RegisterRef> reg;  // present for raw/guard only
  DepClass dep_class = DepClass::kExecution;
  std::vector<PathRecord> valid_paths;

  bool operator==(const DepEdge&) const = default;
};

// Canonical edge order: (consumer, producer, kind, reg).
bool edge_less(const DepEdge& a, const DepEdge& b);
bool same_edge(const DepEdge& a, const DepEdge& b);  // ignores valid_paths

struct DependencyGraph {
  std::shared_ptr<const AnnotatedKernel> kernel;
  std::vector<DepEdge> edges;  // canonical order
  // Edges as constructed, before any pruning.
  std::shared_ptr<const std::vector<DepEdge>> built_edges;
  std::vector<std::vector<size_t>> incoming;  // per instruction, edge indices
  std::vector<std::vector<size_t>> outgoing;
  Diagnostics diagnostics;  // from construction

  const KernelCfg& cfg() const { return kernel->cfg; }
  const NodeMetrics& metrics(size_t index) const { return kernel->metrics[index]; }
  size_t size() const { return kernel ? kernel->cfg.instructions.size() : 0; }

  // Sorts edges canonically and rebuilds adjacency.
  void normalize();
  // Same graph with a different edge list.
  DependencyGraph with_edges(std::vector<DepEdge> new_edges) const;
};

struct GraphOptions {
  bool liveness = true;
  size_t scan_cap = 4096;
};

DependencyGraph build_graph(std::shared_ptr<const AnnotatedKernel> kernel,
                            const GraphOptions& options = {});

// One line per edge: `0x0010 -> 0x0040 kind=raw reg=R4:+1 class=execution`;
// sync edges print `reg=-`.
std::string dump_graph(const DependencyGraph& graph);

}  // namespace stallslice
