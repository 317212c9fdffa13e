// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#include "stallslice/depgraph.h"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>
#include <tuple>

#include "stallslice/sync_trace.h"

namespace stallslice {

namespace {

constexpr std::array<const char*, 5> kEdgeKindNames = {"raw", "guard", "mem_waitcnt", "mem_barrier",
                                                       "mem_swsb"};
constexpr std::array<const char*, 3> kDepClassNames = {"memory", "execution", "synchronization"};

auto edge_key(const DepEdge& e) {
  return std::tuple(e.consumer, e.producer, e.kind, e.reg.has_value(),
                    e.reg.value_or(RegisterRef{}));
}

}  // namespace

const char* to_string(EdgeKind kind) { return kEdgeKindNames[static_cast<size_t>(kind)]; }

std::optional<EdgeKind> edge_kind_from_string(std::string_view s) {
  for (size_t i = 0; i < kEdgeKindNames.size(); ++i) {
    if (s == kEdgeKindNames[i]) return static_cast<EdgeKind>(i);
  }
  return std::nullopt;
}

bool is_sync_kind(EdgeKind kind) {
  return kind == EdgeKind::kMemWaitcnt || kind == EdgeKind::kMemBarrier || kind == EdgeKind::kMemSwsb;
}

const char* to_string(DepClass cls) { return kDepClassNames[static_cast<size_t>(cls)]; }

std::optional<DepClass> dep_class_from_string(std::string_view s) {
  for (size_t i = 0; i < kDepClassNames.size(); ++i) {
    if (s == kDepClassNames[i]) return static_cast<DepClass>(i);
  }
  return std::nullopt;
}

DepClass classify_edge(EdgeKind kind, OpcodeClass producer) {
  if (is_sync_kind(kind) || is_load_like(producer)) return DepClass::kMemory;
  if (producer == OpcodeClass::kBarrierAll) return DepClass::kSynchronization;
  return DepClass::kExecution;
}

bool edge_less(const DepEdge& a, const DepEdge& b) { return edge_key(a) < edge_key(b); }

bool same_edge(const DepEdge& a, const DepEdge& b) { return edge_key(a) == edge_key(b); }

void DependencyGraph::normalize() {
  std::stable_sort(edges.begin(), edges.end(), edge_less);
  const size_t n = size();
  incoming.assign(n, {});
  outgoing.assign(n, {});
  for (size_t i = 0; i < edges.size(); ++i) {
    const DepEdge& e = edges[i];
    if (e.producer >= n || e.consumer >= n)
      throw InvariantError("dependency edge endpoint outside the instruction list");
    incoming[e.consumer].push_back(i);
    outgoing[e.producer].push_back(i);
  }
}

DependencyGraph DependencyGraph::with_edges(std::vector<DepEdge> new_edges) const {
  DependencyGraph g;
  g.kernel = kernel;
  g.built_edges = built_edges;
  g.diagnostics = diagnostics;
  g.edges = std::move(new_edges);
  g.normalize();
  return g;
}

DependencyGraph build_graph(std::shared_ptr<const AnnotatedKernel> kernel, const GraphOptions& options) {
  DependencyGraph graph;
  graph.kernel = std::move(kernel);
  const KernelCfg& cfg = graph.kernel->cfg;

  const ReachingDefinitions reach = reaching_definitions(cfg);
  LinkResult links = per_use_link(cfg, reach);
  std::vector<UseDefTriple> triples =
      options.liveness ? liveness_filter(cfg, std::move(links.triples)) : std::move(links.triples);

  for (const auto& t : triples) {
    DepEdge e;
    e.producer = t.def;
    e.consumer = t.use;
    e.kind = t.kind == LinkKind::kGuard ? EdgeKind::kGuard : EdgeKind::kRaw;
    e.reg = t.reg;
    e.dep_class = classify_edge(e.kind, cfg.instructions[t.def].opcode_class);
    graph.edges.push_back(std::move(e));
  }
  graph.diagnostics = std::move(links.unresolved);

  if (!cfg.instructions.empty()) {
    SyncTraceResult sync = trace_sync(cfg, options.scan_cap);
    graph.edges.insert(graph.edges.end(), sync.edges.begin(), sync.edges.end());
    graph.diagnostics.insert(graph.diagnostics.end(), sync.diagnostics.begin(), sync.diagnostics.end());
  }

  graph.normalize();
  graph.edges.erase(std::unique(graph.edges.begin(), graph.edges.end(), same_edge), graph.edges.end());
  graph.normalize();
  graph.built_edges = std::make_shared<const std::vector<DepEdge>>(graph.edges);
  return graph;
}

std::string dump_graph(const DependencyGraph& graph) {
  std::ostringstream out;
  const KernelCfg& cfg = graph.cfg();
  for (const auto& e : graph.edges) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "0x%04llx -> 0x%04llx",
                  static_cast<unsigned long long>(cfg.instructions[e.producer].offset),
                  static_cast<unsigned long long>(cfg.instructions[e.consumer].offset));
    out << buf << " kind=" << to_string(e.kind);
    out << " reg=" << (e.reg ? format_register(*e.reg, cfg.dialect) : "-");
    out << " class=" << to_string(e.dep_class) << '\n';
  }
  return out.str();
}

}  // namespace stallslice
