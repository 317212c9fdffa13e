// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#include "stallslice/prune.h"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <set>

namespace stallslice {

namespace {

std::string hex_offset(uint64_t offset) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%04llx", static_cast<unsigned long long>(offset));
  return buf;
}

StageResult partition(const DependencyGraph& graph, const std::function<bool(const DepEdge&)>& remove) {
  StageResult result;
  std::vector<DepEdge> kept;
  kept.reserve(graph.edges.size());
  for (const auto& e : graph.edges) {
    if (!is_sync_kind(e.kind) && remove(e)) {
      result.removed.push_back(e);
    } else {
      kept.push_back(e);
    }
  }
  result.graph = graph.with_edges(std::move(kept));
  return result;
}

// Retreating edges of a depth-first traversal from the entry; blocks the
// entry cannot reach are traversed afterwards.
std::set<std::pair<uint32_t, uint32_t>> back_edges(const KernelCfg& cfg) {
  std::set<std::pair<uint32_t, uint32_t>> out;
  const size_t n = cfg.blocks.size();
  std::vector<char> state(n, 0);  // 0 new, 1 on stack, 2 done
  for (uint32_t root = 0; root < n; ++root) {
    const uint32_t start = root == 0 ? cfg.entry : root;
    if (state[start]) continue;
    std::vector<std::pair<uint32_t, size_t>> stack{{start, 0}};
    state[start] = 1;
    while (!stack.empty()) {
      auto& [b, next] = stack.back();
      if (next < cfg.blocks[b].succs.size()) {
        const uint32_t s = cfg.blocks[b].succs[next++];
        if (state[s] == 1) {
          out.insert({b, s});
        } else if (state[s] == 0) {
          state[s] = 1;
          stack.push_back({s, 0});
        }
      } else {
        state[b] = 2;
        stack.pop_back();
      }
    }
  }
  return out;
}

class PathSearch {
 public:
  PathSearch(const KernelCfg& cfg, const std::set<std::pair<uint32_t, uint32_t>>& back,
             size_t max_paths, size_t max_depth)
      : cfg_(cfg), back_(back), max_paths_(max_paths), max_depth_(max_depth) {
    for (const auto& [from, to] : back_) back_index_.push_back({from, to});
  }

  struct Outcome {
    std::vector<PathRecord> valid;
    bool capped = false;
  };

  Outcome run(const DepEdge& edge, double threshold) {
    consumer_ = edge.consumer;
    threshold_ = threshold;
    link_units_.clear();
    for (const auto& u : units_of(*edge.reg)) {
      const RegisterRef unit_ref{u.cls, u.index, 1};
      for (const auto& d : cfg_.instructions[edge.producer].dests) {
        if (registers_overlap(d, unit_ref)) {
          link_units_.push_back(unit_ref);
          break;
        }
      }
    }
    used_.assign(back_index_.size(), 0);
    terminals_ = 0;
    outcome_ = Outcome{};
    explore(edge.producer, 0.0, 0);
    return std::move(outcome_);
  }

 private:
  bool kills_link(size_t index) const {
    if (link_units_.empty()) return false;
    const auto& dests = cfg_.instructions[index].dests;
    return std::all_of(link_units_.begin(), link_units_.end(), [&](const RegisterRef& u) {
      return std::any_of(dests.begin(), dests.end(),
                         [&](const RegisterRef& d) { return registers_overlap(d, u); });
    });
  }

  void terminal() { ++terminals_; }

  // Returns false when the search must stop.
  bool step(size_t next, double accum, uint32_t length) {
    if (terminals_ >= max_paths_) {
      outcome_.capped = true;
      return false;
    }
    if (length > max_depth_) {
      outcome_.capped = true;
      terminal();
      return true;
    }
    if (next == consumer_) {
      outcome_.valid.push_back({length, accum});
      terminal();
      return true;
    }
    if (kills_link(next)) {
      terminal();
      return true;
    }
    const double acc = accum + issue_cycles(cfg_.instructions[next]);
    if (acc > threshold_) {
      terminal();
      return true;
    }
    return explore(next, acc, length);
  }

  bool explore(size_t at, double accum, uint32_t length) {
    const BasicBlock& block = cfg_.block_containing(at);
    if (at < block.last_index) return step(at + 1, accum, length + 1);
    if (block.succs.empty()) {
      terminal();
      return true;
    }
    for (uint32_t s : block.succs) {
      size_t back_id = back_index_.size();
      if (back_.count({block.id, s})) {
        back_id = static_cast<size_t>(
            std::find(back_index_.begin(), back_index_.end(), std::pair{block.id, s}) - back_index_.begin());
        if (used_[back_id]) continue;
        used_[back_id] = 1;
      }
      const bool go_on = step(cfg_.blocks[s].first_index, accum, length + 1);
      if (back_id < back_index_.size()) used_[back_id] = 0;
      if (!go_on) return false;
    }
    return true;
  }

  const KernelCfg& cfg_;
  const std::set<std::pair<uint32_t, uint32_t>>& back_;
  std::vector<std::pair<uint32_t, uint32_t>> back_index_;
  size_t max_paths_;
  size_t max_depth_;

  size_t consumer_ = 0;
  double threshold_ = 0.0;
  std::vector<RegisterRef> link_units_;
  std::vector<char> used_;
  size_t terminals_ = 0;
  Outcome outcome_;
};

}  // namespace

LatencyTable LatencyTable::defaults(Dialect dialect) {
  LatencyTable t;
  using C = OpcodeClass;
  if (dialect == Dialect::kNvidia) {
    t.thresholds.fill(4.0);
    t.set(C::kGlobalLoad, 200);
    t.set(C::kGlobalStore, 200);
    t.set(C::kAtomic, 200);
    t.set(C::kSend, 200);
    t.set(C::kLocalLoad, 30);
    t.set(C::kLocalStore, 30);
    t.set(C::kConstantLoad, 20);
    t.set(C::kScalarLoad, 20);
    t.set(C::kFpArith, 6);
    t.set(C::kConversion, 6);
    t.set(C::kIntArith, 4);
  } else {
    t.thresholds.fill(2.0);
    t.set(C::kGlobalLoad, 32);
    t.set(C::kGlobalStore, 32);
    t.set(C::kAtomic, 32);
    t.set(C::kSend, 32);
    t.set(C::kLocalLoad, 8);
    t.set(C::kLocalStore, 8);
    t.set(C::kScalarLoad, 8);
    t.set(C::kConstantLoad, 8);
  }
  return t;
}

std::string PruneOptions::stage_list() const {
  std::string out;
  for (int s = 1; s <= 4; ++s) {
    if (!stage_enabled(s)) continue;
    if (!out.empty()) out += ",";
    out += std::to_string(s);
  }
  return out;
}

StageResult prune_opcode(const DependencyGraph& graph) {
  const KernelCfg& cfg = graph.cfg();
  return partition(graph, [&](const DepEdge& e) {
    const NodeMetrics& m = graph.metrics(e.consumer);
    if (m.latency_samples == 0) return false;
    const OpcodeClass producer = cfg.instructions[e.producer].opcode_class;
    const auto count = [&](CommonStallClass c) { return m.counts[static_cast<size_t>(c)]; };
    if (count(CommonStallClass::kMemoryDep) == m.latency_samples && is_compute(producer)) return true;
    if (count(CommonStallClass::kExecutionDep) == m.latency_samples &&
        producer == OpcodeClass::kGlobalLoad)
      return true;
    return false;
  });
}

StageResult prune_barrier(const DependencyGraph& graph) {
  const KernelCfg& cfg = graph.cfg();
  if (cfg.dialect != Dialect::kNvidia) return StageResult{graph, {}, {}};
  return partition(graph, [&](const DepEdge& e) {
    const auto* producer = cfg.instructions[e.producer].barrier();
    if (!producer || producer->set_any().none()) return false;
    const auto* consumer = cfg.instructions[e.consumer].barrier();
    const BarrierMask waited = consumer ? consumer->waited() : BarrierMask{};
    return (producer->set_any() & waited).none();
  });
}

double issue_cycles(const Instruction& inst) {
  if (inst.dialect == Dialect::kNvidia) {
    const auto* b = inst.barrier();
    return b ? static_cast<double>(b->issue_stall_cycles()) : 1.0;
  }
  return 1.0;
}

StageResult prune_latency(const DependencyGraph& graph, const LatencyTable& table, size_t max_paths,
                          size_t max_depth) {
  const KernelCfg& cfg = graph.cfg();
  StageResult result;
  const auto back = back_edges(cfg);
  PathSearch search(cfg, back, max_paths, max_depth);
  std::vector<DepEdge> kept;
  kept.reserve(graph.edges.size());
  for (const auto& e : graph.edges) {
    if (is_sync_kind(e.kind)) {
      kept.push_back(e);
      continue;
    }
    const Instruction& producer = cfg.instructions[e.producer];
    auto outcome = search.run(e, table.at(producer.opcode_class));
    if (outcome.capped) {
      const Instruction& consumer = cfg.instructions[e.consumer];
      result.diagnostics.push_back(
          {DiagnosticKind::kPathCap, consumer.offset,
           "path enumeration " + hex_offset(producer.offset) + " -> " + hex_offset(consumer.offset) +
               " hit its cap (" + std::to_string(max_paths) + " paths, depth " +
               std::to_string(max_depth) + "); edge kept"});
    }
    if (outcome.valid.empty() && !outcome.capped) {
      result.removed.push_back(e);
      continue;
    }
    DepEdge survivor = e;
    survivor.valid_paths = std::move(outcome.valid);
    kept.push_back(std::move(survivor));
  }
  result.graph = graph.with_edges(std::move(kept));
  return result;
}

StageResult prune_execution(const DependencyGraph& graph, bool enabled) {
  if (!enabled) return StageResult{graph, {}, {}};
  return partition(graph, [&](const DepEdge& e) {
    const auto& exec = graph.metrics(e.producer).exec_count;
    return exec.has_value() && *exec == 0;
  });
}

PruneResult prune(const DependencyGraph& graph, const PruneOptions& options) {
  PruneResult result;
  result.graph = graph;
  auto absorb = [&](int stage, StageResult r) {
    result.graph = std::move(r.graph);
    result.removed[static_cast<size_t>(stage - 1)] = std::move(r.removed);
    result.diagnostics.insert(result.diagnostics.end(), r.diagnostics.begin(), r.diagnostics.end());
  };
  if (options.stage_enabled(1)) absorb(1, prune_opcode(result.graph));
  if (options.stage_enabled(2)) absorb(2, prune_barrier(result.graph));
  if (options.stage_enabled(3))
    absorb(3, prune_latency(result.graph, options.table(graph.cfg().dialect), options.max_paths,
                            options.max_depth));
  if (options.stage_enabled(4)) absorb(4, prune_execution(result.graph, options.prune_exec));
  return result;
}

}  // namespace stallslice
