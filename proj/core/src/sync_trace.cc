// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#include "stallslice/sync_trace.h"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <set>

namespace stallslice {

namespace {

std::string hex_offset(uint64_t offset) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%04llx", static_cast<unsigned long long>(offset));
  return buf;
}

// Walks every backward path from just before `waiter`. State::visit returns
// true to end the path; State::end_path runs once per finished path. Paths
// stop at the kernel entry, at a block already on the path, or after coming
// back around to the waiter through a loop.
template <typename State>
class BackwardScan {
 public:
  BackwardScan(const KernelCfg& cfg, size_t waiter, size_t cap)
      : cfg_(cfg), waiter_(waiter), cap_(cap), on_path_(cfg.blocks.size(), 0) {}

  void run(State state) {
    const BasicBlock& start = cfg_.block_containing(waiter_);
    on_path_[start.id] = 1;
    walk(start.id, start.first_index, waiter_, std::move(state), false);
  }

  bool capped() const { return capped_; }

 private:
  void walk(uint32_t block, size_t lo, size_t hi, State state, bool reentered) {
    for (size_t i = hi; i-- > lo;) {
      if (visited_ >= cap_) {
        capped_ = true;
        state.end_path();
        return;
      }
      ++visited_;
      if (state.visit(i)) {
        state.end_path();
        return;
      }
    }
    const auto& preds = cfg_.blocks[block].preds;
    if (reentered || preds.empty()) {
      state.end_path();
      return;
    }
    const uint32_t start = cfg_.block_of[waiter_];
    for (uint32_t p : preds) {
      const BasicBlock& pb = cfg_.blocks[p];
      if (p == start && !start_reentered_) {
        start_reentered_ = true;
        walk(p, waiter_ + 1, pb.last_index + 1, state, true);
        start_reentered_ = false;
      } else if (on_path_[p]) {
        State copy = state;
        copy.end_path();
      } else {
        on_path_[p] = 1;
        walk(p, pb.first_index, pb.last_index + 1, state, false);
        on_path_[p] = 0;
      }
    }
  }

  const KernelCfg& cfg_;
  size_t waiter_;
  size_t cap_;
  size_t visited_ = 0;
  bool capped_ = false;
  bool start_reentered_ = false;
  std::vector<char> on_path_;
};

DepEdge sync_edge(size_t producer, size_t consumer, EdgeKind kind) {
  DepEdge e;
  e.producer = producer;
  e.consumer = consumer;
  e.kind = kind;
  e.dep_class = DepClass::kMemory;
  return e;
}

SyncTraceResult finish(std::set<std::pair<size_t, size_t>> pairs, EdgeKind kind,
                       Diagnostics diagnostics) {
  SyncTraceResult result;
  for (const auto& [consumer, producer] : pairs) result.edges.push_back(sync_edge(producer, consumer, kind));
  std::sort(result.edges.begin(), result.edges.end(), edge_less);
  result.diagnostics = std::move(diagnostics);
  return result;
}

void require_dialect(const KernelCfg& cfg, Dialect dialect, const char* op) {
  if (cfg.dialect != dialect) {
    throw InputError(std::string(op) + " requires a " + to_string(dialect) + " kernel, got " +
                     to_string(cfg.dialect));
  }
}

enum class Counter { kVm, kLgkm };

bool counts_toward(OpcodeClass cls, Counter counter) {
  switch (cls) {
    case OpcodeClass::kGlobalLoad:
    case OpcodeClass::kGlobalStore:
    case OpcodeClass::kAtomic:
      return counter == Counter::kVm;
    case OpcodeClass::kLocalLoad:
    case OpcodeClass::kLocalStore:
    case OpcodeClass::kScalarLoad:
    case OpcodeClass::kConstantLoad:
      return counter == Counter::kLgkm;
    default:
      return false;
  }
}

std::optional<uint32_t> counter_value(const WaitcntSync& w, Counter counter) {
  return counter == Counter::kVm ? w.vmcnt : w.lgkmcnt;
}

struct WaitcntState {
  struct Shared {
    std::set<size_t> producers;
    bool underflow = false;
    uint32_t worst_pending = 0;
  };

  const KernelCfg* cfg;
  Counter counter;
  uint32_t wait_for;
  Shared* shared;
  // Newest first: instruction index, or -(level+1) for an earlier partial wait.
  std::vector<long long> events;

  bool visit(size_t i) {
    const Instruction& inst = cfg->instructions[i];
    if (counts_toward(inst.opcode_class, counter)) {
      events.push_back(static_cast<long long>(i));
      return false;
    }
    if (const auto* w = inst.waitcnt()) {
      if (auto level = counter_value(*w, counter)) {
        if (*level == 0) return true;  // full drain: epoch boundary
        events.push_back(-static_cast<long long>(*level) - 1);
      }
    }
    return false;
  }

  void end_path() {
    std::deque<size_t> pending;
    for (auto it = events.rbegin(); it != events.rend(); ++it) {
      if (*it >= 0) {
        pending.push_back(static_cast<size_t>(*it));
      } else {
        const size_t level = static_cast<size_t>(-(*it) - 1);
        while (pending.size() > level) pending.pop_front();
      }
    }
    const size_t m = pending.size();
    if (wait_for > m) {
      shared->underflow = true;
      shared->worst_pending = static_cast<uint32_t>(m);
      return;
    }
    for (size_t k = 0; k < m - wait_for; ++k) shared->producers.insert(pending[k]);
  }
};

template <typename Mask>
struct SetterState {
  struct Shared {
    std::set<std::pair<size_t, uint32_t>> hits;  // (producer, index)
  };

  const KernelCfg* cfg;
  Mask remaining;
  Shared* shared;
  Mask (*sets_of)(const Instruction&);

  bool visit(size_t i) {
    const Mask hit = sets_of(cfg->instructions[i]) & remaining;
    if (hit.none()) return false;
    for (uint32_t b = 0; b < hit.size(); ++b) {
      if (hit.test(b)) shared->hits.insert({i, b});
    }
    remaining &= ~hit;
    return remaining.none();
  }

  void end_path() {}
};

BarrierMask barrier_sets(const Instruction& inst) {
  const auto* b = inst.barrier();
  return b ? b->set_any() : BarrierMask{};
}

TokenMask token_sets(const Instruction& inst) {
  TokenMask out;
  const auto* s = inst.swsb();
  if (s && s->set_token) out.set(*s->set_token);
  return out;
}

void scan_cap_diagnostic(Diagnostics& out, const Instruction& inst, size_t cap) {
  out.push_back({DiagnosticKind::kScanCap, inst.offset,
                 "backward scan from " + inst.mnemonic + " at " + hex_offset(inst.offset) +
                     " stopped after " + std::to_string(cap) + " instructions"});
}

template <typename Mask>
SyncTraceResult trace_setters(const KernelCfg& cfg, size_t scan_cap, EdgeKind kind,
                              Mask (*waited_of)(const Instruction&), Mask (*sets_of)(const Instruction&),
                              DiagnosticKind missing_kind, const char* (*name_of)(uint32_t, char*)) {
  std::set<std::pair<size_t, size_t>> pairs;
  Diagnostics diagnostics;
  for (size_t w = 0; w < cfg.instructions.size(); ++w) {
    const Instruction& inst = cfg.instructions[w];
    const Mask waited = waited_of(inst);
    if (waited.none()) continue;
    typename SetterState<Mask>::Shared shared;
    BackwardScan<SetterState<Mask>> scan(cfg, w, scan_cap);
    scan.run(SetterState<Mask>{&cfg, waited, &shared, sets_of});
    Mask found;
    for (const auto& [producer, index] : shared.hits) {
      pairs.insert({w, producer});
      found.set(index);
    }
    if (scan.capped()) scan_cap_diagnostic(diagnostics, inst, scan_cap);
    for (uint32_t b = 0; b < waited.size(); ++b) {
      if (!waited.test(b) || found.test(b)) continue;
      char buf[16];
      diagnostics.push_back({missing_kind, inst.offset,
                             std::string(name_of(b, buf)) + " waited by " + inst.mnemonic + " at " +
                                 hex_offset(inst.offset) + " has no setter on any path"});
    }
  }
  return finish(std::move(pairs), kind, std::move(diagnostics));
}

}  // namespace

SyncTraceResult trace_waitcnt(const KernelCfg& cfg, size_t scan_cap) {
  require_dialect(cfg, Dialect::kAmd, "trace_waitcnt");
  std::set<std::pair<size_t, size_t>> pairs;
  Diagnostics diagnostics;
  for (size_t w = 0; w < cfg.instructions.size(); ++w) {
    const Instruction& inst = cfg.instructions[w];
    const auto* wait = inst.waitcnt();
    if (!wait) continue;
    bool capped = false;
    for (Counter counter : {Counter::kVm, Counter::kLgkm}) {
      auto level = counter_value(*wait, counter);
      if (!level) continue;
      WaitcntState::Shared shared;
      BackwardScan<WaitcntState> scan(cfg, w, scan_cap);
      scan.run(WaitcntState{&cfg, counter, *level, &shared, {}});
      capped = capped || scan.capped();
      for (size_t p : shared.producers) pairs.insert({w, p});
      if (shared.underflow) {
        const char* name = counter == Counter::kVm ? "vmcnt" : "lgkmcnt";
        diagnostics.push_back({DiagnosticKind::kWaitcntUnderflow, inst.offset,
                               std::string(name) + "(" + std::to_string(*level) + ") at " +
                                   hex_offset(inst.offset) + " exceeds the " +
                                   std::to_string(shared.worst_pending) +
                                   " pending operations on some path"});
      }
    }
    if (capped) scan_cap_diagnostic(diagnostics, inst, scan_cap);
  }
  return finish(std::move(pairs), EdgeKind::kMemWaitcnt, std::move(diagnostics));
}

SyncTraceResult trace_barriers(const KernelCfg& cfg, size_t scan_cap) {
  require_dialect(cfg, Dialect::kNvidia, "trace_barriers");
  return trace_setters<BarrierMask>(
      cfg, scan_cap, EdgeKind::kMemBarrier,
      [](const Instruction& inst) {
        const auto* b = inst.barrier();
        return b ? b->waited() : BarrierMask{};
      },
      barrier_sets, DiagnosticKind::kMissingBarrierSetter,
      [](uint32_t b, char* buf) -> const char* {
        std::snprintf(buf, 16, "B%u", b);
        return buf;
      });
}

SyncTraceResult trace_swsb(const KernelCfg& cfg, size_t scan_cap) {
  require_dialect(cfg, Dialect::kIntel, "trace_swsb");
  return trace_setters<TokenMask>(
      cfg, scan_cap, EdgeKind::kMemSwsb,
      [](const Instruction& inst) {
        const auto* s = inst.swsb();
        return s ? s->waited() : TokenMask{};
      },
      token_sets, DiagnosticKind::kMissingSbidSetter,
      [](uint32_t t, char* buf) -> const char* {
        std::snprintf(buf, 16, "SBID %u", t);
        return buf;
      });
}

SyncTraceResult trace_sync(const KernelCfg& cfg, size_t scan_cap) {
  switch (cfg.dialect) {
    case Dialect::kAmd: return trace_waitcnt(cfg, scan_cap);
    case Dialect::kNvidia: return trace_barriers(cfg, scan_cap);
    case Dialect::kIntel: return trace_swsb(cfg, scan_cap);
  }
  return {};
}

}  // namespace stallslice
