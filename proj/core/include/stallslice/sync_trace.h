// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// Memory-dependency edges from vendor synchronization mechanisms. Each
// waiting instruction is traced backward through the CFG; at a merge point
// every incoming chain is scanned independently and the edge sets are
// unioned. A scan visits at most `scan_cap` instructions in total.

#pragma once

#include <vector>

#include "stallslice/cfg.h"
#include "stallslice/depgraph.h"
#include "stallslice/error.h"

namespace stallslice {

struct SyncTraceResult {
  std::vector<DepEdge> edges;  // canonical order, deduplicated
  Diagnostics diagnostics;
};

inline constexpr size_t kDefaultScanCap = 4096;

// AMD s_waitcnt: vmcnt counts global loads/stores and atomics, lgkmcnt counts
// local, scalar and constant memory operations. Pending operations since the
// last full drain are replayed in issue order; a wait for N leaves the N
// youngest in flight and links the rest to the waitcnt.
SyncTraceResult trace_waitcnt(const KernelCfg& cfg, size_t scan_cap = kDefaultScanCap);

// NVIDIA: each waited barrier (wait mask or depbar list) links to the
// nearest instruction that sets it, per path.
SyncTraceResult trace_barriers(const KernelCfg& cfg, size_t scan_cap = kDefaultScanCap);

// Intel: each waited SBID token links to the nearest instruction that set it.
SyncTraceResult trace_swsb(const KernelCfg& cfg, size_t scan_cap = kDefaultScanCap);

// Dispatches on the kernel dialect.
SyncTraceResult trace_sync(const KernelCfg& cfg, size_t scan_cap = kDefaultScanCap);

}  // namespace stallslice
