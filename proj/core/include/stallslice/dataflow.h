// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// Register dataflow over a KernelCfg. Registers are tracked per architectural
// unit: a write to v[2:3] defines v2 and v3, and kills earlier definitions of
// either unit.

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <vector>

#include "stallslice/cfg.h"
#include "stallslice/error.h"
#include "stallslice/isa.h"

namespace stallslice {

struct RegUnit {
  RegClass cls = RegClass::kVectorGpr;
  uint32_t index = 0;

  friend auto operator<=>(const RegUnit&, const RegUnit&) = default;
};

std::vector<RegUnit> units_of(const RegisterRef& reg);

// Per block: unit -> defining instruction indices (ascending) live on entry.
struct ReachingDefinitions {
  std::vector<std::map<RegUnit, std::vector<size_t>>> entry;

  // Empty when nothing reaches.
  const std::vector<size_t>& at(uint32_t block, const RegUnit& unit) const;
};

ReachingDefinitions reaching_definitions(const KernelCfg& cfg);

enum class LinkKind { kRaw, kGuard };

// `reg` is the register as the consumer names it (a guard's predicate for
// kGuard). One triple per (use, reg, def, kind).
struct UseDefTriple {
  size_t use = 0;
  RegisterRef reg;
  size_t def = 0;
  LinkKind kind = LinkKind::kRaw;

  friend auto operator<=>(const UseDefTriple&, const UseDefTriple&) = default;
};

struct LinkResult {
  std::vector<UseDefTriple> triples;  // sorted
  Diagnostics unresolved;
};

// Forward walk over each block starting from its entry set: sources link to
// the current definitions, the guard links as kGuard, then destinations
// replace the current set (strong update, even when predicated).
LinkResult per_use_link(const KernelCfg& cfg, const ReachingDefinitions& reach_in);

struct Liveness {
  std::vector<std::vector<RegUnit>> live_in;   // per block, sorted
  std::vector<std::vector<RegUnit>> live_out;  // per block, sorted

  bool live_out_of(uint32_t block, const RegUnit& unit) const;
};

Liveness compute_liveness(const KernelCfg& cfg);

// A triple is intra-block when def and use share a block and the def comes
// first; those are always kept. Other triples survive only if some unit
// linking them is live out of the defining block.
std::vector<UseDefTriple> liveness_filter(const KernelCfg& cfg,
                                          std::vector<UseDefTriple> triples);

}  // namespace stallslice
