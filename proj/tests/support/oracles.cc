// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#include "oracles.h"

#include <algorithm>
#include <functional>
#include <queue>

#include "stallslice/prune.h"

namespace stallslice::testing {

namespace {

std::vector<std::vector<size_t>> instruction_preds(const KernelCfg& cfg) {
  std::vector<std::vector<size_t>> preds(cfg.instructions.size());
  for (const auto& b : cfg.blocks) {
    for (size_t i = b.first_index + 1; i <= b.last_index; ++i) preds[i].push_back(i - 1);
    for (uint32_t p : b.preds) preds[b.first_index].push_back(cfg.blocks[p].last_index);
  }
  return preds;
}

std::vector<std::vector<size_t>> instruction_succs(const KernelCfg& cfg) {
  std::vector<std::vector<size_t>> succs(cfg.instructions.size());
  for (const auto& b : cfg.blocks) {
    for (size_t i = b.first_index; i < b.last_index; ++i) succs[i].push_back(i + 1);
    for (uint32_t s : b.succs) succs[b.last_index].push_back(cfg.blocks[s].first_index);
  }
  return succs;
}

bool writes(const Instruction& inst, const RegisterRef& unit) {
  return std::any_of(inst.dests.begin(), inst.dests.end(),
                     [&](const RegisterRef& d) { return registers_overlap(d, unit); });
}

std::vector<RegisterRef> unit_refs(const RegisterRef& r) {
  std::vector<RegisterRef> out;
  for (uint32_t k = 0; k < r.span; ++k) out.push_back({r.cls, r.index + k, 1});
  return out;
}

}  // namespace

std::set<EdgeKey> def_clear_edges(const KernelCfg& cfg) {
  const auto preds = instruction_preds(cfg);
  std::set<EdgeKey> out;
  for (size_t use = 0; use < cfg.instructions.size(); ++use) {
    const Instruction& inst = cfg.instructions[use];
    std::vector<std::pair<RegisterRef, EdgeKind>> reads;
    for (const auto& s : inst.srcs) reads.push_back({s, EdgeKind::kRaw});
    if (inst.guard) reads.push_back({inst.guard->reg, EdgeKind::kGuard});
    for (const auto& [reg, kind] : reads) {
      for (const auto& unit : unit_refs(reg)) {
        std::vector<char> seen(cfg.instructions.size(), 0);
        std::vector<size_t> work(preds[use].begin(), preds[use].end());
        while (!work.empty()) {
          const size_t i = work.back();
          work.pop_back();
          if (seen[i]) continue;
          seen[i] = 1;
          if (writes(cfg.instructions[i], unit)) {
            out.insert({i, use, kind, reg});
            continue;
          }
          for (size_t p : preds[i]) work.push_back(p);
        }
      }
    }
  }
  return out;
}

std::set<EdgeKey> register_edge_keys(const DependencyGraph& graph) {
  std::set<EdgeKey> out;
  for (const auto& e : graph.edges) {
    if (e.kind == EdgeKind::kRaw || e.kind == EdgeKind::kGuard) out.insert({e.producer, e.consumer, e.kind, *e.reg});
  }
  return out;
}

std::optional<double> min_hidden_cycles(const KernelCfg& cfg, const DepEdge& edge) {
  const auto succs = instruction_succs(cfg);
  const Instruction& producer = cfg.instructions[edge.producer];
  std::vector<RegisterRef> link;
  for (const auto& u : unit_refs(*edge.reg)) {
    if (writes(producer, u)) link.push_back(u);
  }
  auto kills = [&](size_t i) {
    return !link.empty() && std::all_of(link.begin(), link.end(),
                                        [&](const RegisterRef& u) { return writes(cfg.instructions[i], u); });
  };

  // Dijkstra where entering an intermediate instruction costs its issue cycles.
  std::vector<double> best(cfg.instructions.size(), -1.0);
  using Item = std::pair<double, size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  std::optional<double> answer;
  auto relax = [&](size_t from_cost_node, double cost) {
    for (size_t s : succs[from_cost_node]) {
      if (s == edge.consumer) {
        if (!answer || cost < *answer) answer = cost;
        continue;
      }
      if (s == edge.producer || kills(s)) continue;
      const double c = cost + issue_cycles(cfg.instructions[s]);
      if (best[s] < 0.0 || c < best[s]) {
        best[s] = c;
        queue.push({c, s});
      }
    }
  };
  relax(edge.producer, 0.0);
  while (!queue.empty()) {
    auto [c, i] = queue.top();
    queue.pop();
    if (c > best[i]) continue;
    relax(i, c);
  }
  return answer;
}

}  // namespace stallslice::testing
