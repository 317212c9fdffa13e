// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#include "stallslice/blame.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <set>

namespace stallslice {

namespace {

constexpr std::array<const char*, 6> kSelfNames = {
    "memory_latency",      "compute_saturation", "synchronization_overhead",
    "pipeline_contention", "instruction_fetch",  "indirect_addressing",
};

double issue_count(const NodeMetrics& m) {
  if (m.exec_count) return static_cast<double>(*m.exec_count);
  if (m.sampled && m.total_samples > 0) return static_cast<double>(m.total_samples);
  return 1.0;
}

bool address_from_load(const DependencyGraph& graph, size_t instruction) {
  const auto& inst = graph.cfg().instructions[instruction];
  if (inst.address_srcs.empty()) return false;
  const std::vector<DepEdge>& edges = graph.built_edges ? *graph.built_edges : graph.edges;
  auto first = std::lower_bound(edges.begin(), edges.end(), instruction,
                                [](const DepEdge& e, size_t c) { return e.consumer < c; });
  for (auto it = first; it != edges.end() && it->consumer == instruction; ++it) {
    if (it->kind != EdgeKind::kRaw || !it->reg) continue;
    if (!is_load_like(graph.cfg().instructions[it->producer].opcode_class)) continue;
    for (const auto& a : inst.address_srcs) {
      if (registers_overlap(a, *it->reg)) return true;
    }
  }
  return false;
}

}  // namespace

const char* to_string(SelfBlameSubcategory s) { return kSelfNames[static_cast<size_t>(s)]; }

std::optional<SelfBlameSubcategory> self_blame_from_string(std::string_view s) {
  for (size_t i = 0; i < kSelfNames.size(); ++i) {
    if (s == kSelfNames[i]) return static_cast<SelfBlameSubcategory>(i);
  }
  return std::nullopt;
}

double match_fraction(const DepEdge& edge, const NodeMetrics& consumer) {
  switch (edge.dep_class) {
    case DepClass::kMemory: {
      double f = consumer.fraction(CommonStallClass::kMemoryDep);
      if (is_sync_kind(edge.kind)) f += consumer.fraction(CommonStallClass::kSynchronization);
      return f;
    }
    case DepClass::kExecution: return consumer.fraction(CommonStallClass::kExecutionDep);
    case DepClass::kSynchronization: return consumer.fraction(CommonStallClass::kSynchronization);
  }
  return 0.0;
}

double edge_distance(const DependencyGraph& /*graph*/, const DepEdge& edge) {
  if (!edge.valid_paths.empty()) {
    double sum = 0.0;
    for (const auto& p : edge.valid_paths) sum += p.length_instructions;
    return sum / static_cast<double>(edge.valid_paths.size());
  }
  const size_t d = edge.producer > edge.consumer ? edge.producer - edge.consumer
                                                 : edge.consumer - edge.producer;
  return static_cast<double>(std::max<size_t>(d, 1));
}

SelfBlameSubcategory classify_self_blame(const NodeMetrics& m, bool address_from_load) {
  using C = CommonStallClass;
  const auto count = [&](C c) { return m.counts[static_cast<size_t>(c)]; };
  struct Candidate {
    uint64_t samples;
    SelfBlameSubcategory sub;
  };
  // In CommonStallClass order, so a strict > keeps the earlier class on ties.
  const std::array<Candidate, 5> candidates = {{
      {count(C::kMemoryDep), SelfBlameSubcategory::kMemoryLatency},
      {count(C::kExecutionDep), SelfBlameSubcategory::kComputeSaturation},
      {count(C::kSynchronization), SelfBlameSubcategory::kSynchronizationOverhead},
      {count(C::kInstructionFetch), SelfBlameSubcategory::kInstructionFetch},
      {count(C::kPipelineBusy) + count(C::kNotSelected), SelfBlameSubcategory::kPipelineContention},
  }};
  const Candidate* best = &candidates[0];
  for (const auto& c : candidates) {
    if (c.samples > best->samples) best = &c;
  }
  if (best->samples == 0) return SelfBlameSubcategory::kPipelineContention;
  if (best->sub == SelfBlameSubcategory::kMemoryLatency && address_from_load)
    return SelfBlameSubcategory::kIndirectAddressing;
  return best->sub;
}

BlameEntry self_blame(const DependencyGraph& graph, size_t instruction) {
  const NodeMetrics& m = graph.metrics(instruction);
  BlameEntry e;
  e.stalled = instruction;
  e.kind = classify_self_blame(m, address_from_load(graph, instruction));
  e.blame_cycles = m.stall_cycles;
  return e;
}

std::vector<BlameEntry> attribute_blame(const DependencyGraph& graph) {
  std::vector<BlameEntry> out;
  for (size_t j = 0; j < graph.size(); ++j) {
    const NodeMetrics& m = graph.metrics(j);
    const double s = m.stall_cycles;
    if (!(s > 0.0)) continue;
    const auto& incoming = graph.incoming[j];
    if (incoming.empty()) {
      out.push_back(self_blame(graph, j));
      continue;
    }

    std::vector<BlameFactors> factors(incoming.size());
    double d_min = INFINITY, e_min = INFINITY, n_sum = 0.0;
    std::vector<double> d(incoming.size()), eff(incoming.size()), n(incoming.size());
    for (size_t k = 0; k < incoming.size(); ++k) {
      const DepEdge& edge = graph.edges[incoming[k]];
      const NodeMetrics& producer = graph.metrics(edge.producer);
      d[k] = edge_distance(graph, edge);
      eff[k] = producer.efficiency;
      n[k] = issue_count(producer);
      d_min = std::min(d_min, d[k]);
      e_min = std::min(e_min, eff[k]);
      n_sum += n[k];
    }
    double total = 0.0;
    for (size_t k = 0; k < incoming.size(); ++k) {
      const DepEdge& edge = graph.edges[incoming[k]];
      factors[k].dist = d_min / d[k];
      factors[k].eff = e_min / eff[k];
      factors[k].isu = n_sum > 0.0 ? n[k] / n_sum : 0.0;
      factors[k].match = match_fraction(edge, m);
      total += factors[k].product();
    }
    if (!(total > 0.0)) {
      out.push_back(self_blame(graph, j));
      continue;
    }
    for (size_t k = 0; k < incoming.size(); ++k) {
      const DepEdge& edge = graph.edges[incoming[k]];
      BlameEntry e;
      e.stalled = j;
      e.cause = edge.producer;
      e.kind = edge.kind;
      e.reg = edge.reg;
      e.blame_cycles = s * factors[k].product() / total;
      e.factors = factors[k];
      out.push_back(e);
    }
  }
  return out;
}

std::vector<ChainHop> trace_chain(const DependencyGraph& graph, const std::vector<BlameEntry>& blame,
                                  size_t start, size_t max_depth) {
  if (start >= graph.size())
    throw InputError("chain start " + std::to_string(start) + " is not an instruction of the graph");

  // Entries are grouped by stalled instruction; index the groups.
  std::vector<std::pair<size_t, size_t>> range(graph.size(), {0, 0});
  for (size_t i = 0; i < blame.size();) {
    size_t k = i;
    while (k < blame.size() && blame[k].stalled == blame[i].stalled) ++k;
    range[blame[i].stalled] = {i, k};
    i = k;
  }

  const auto& instrs = graph.cfg().instructions;
  std::vector<ChainHop> chain;
  std::set<size_t> seen{start};
  ChainHop hop;
  hop.instruction = start;
  hop.blame_cycles = graph.metrics(start).stall_cycles;
  hop.share = 1.0;
  size_t current = start;
  while (true) {
    const auto [lo, hi] = range[current];
    const BlameEntry* best = nullptr;
    for (size_t k = lo; k < hi; ++k) {
      const BlameEntry& e = blame[k];
      if (!best) {
        best = &e;
        continue;
      }
      if (e.blame_cycles > best->blame_cycles) {
        best = &e;
      } else if (e.blame_cycles == best->blame_cycles && e.cause && best->cause &&
                 instrs[*e.cause].offset < instrs[*best->cause].offset) {
        best = &e;
      }
    }
    if (best && best->is_self()) hop.self = std::get<SelfBlameSubcategory>(best->kind);
    chain.push_back(hop);
    if (!best || best->is_self() || chain.size() > max_depth) break;
    const size_t next = *best->cause;
    if (!seen.insert(next).second) break;
    const double s = graph.metrics(current).stall_cycles;
    hop = ChainHop{};
    hop.instruction = next;
    hop.via = std::get<EdgeKind>(best->kind);
    hop.reg = best->reg;
    hop.blame_cycles = best->blame_cycles;
    hop.share = s > 0.0 ? best->blame_cycles / s : 0.0;
    current = next;
  }
  return chain;
}

}  // namespace stallslice
