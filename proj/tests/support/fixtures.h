// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stallslice/cfg.h"
#include "stallslice/depgraph.h"
#include "stallslice/profile.h"

namespace stallslice::testing {

// First kernel of `listing`, with `profile_json` attached when non-empty.
std::shared_ptr<const AnnotatedKernel> annotate(Dialect dialect, std::string_view listing,
                                                std::string_view profile_json = {});
std::shared_ptr<const AnnotatedKernel> annotate(KernelCfg cfg, const KernelProfile* profile);

KernelCfg cfg_of(Dialect dialect, std::string_view listing);

// Index of the instruction at `offset`; aborts the test binary when absent.
size_t at(const KernelCfg& cfg, uint64_t offset);

// dump_graph lines restricted to `kinds` (all kinds when empty).
std::vector<std::string> edge_lines(const DependencyGraph& graph, const std::vector<EdgeKind>& kinds = {});
std::vector<std::string> edge_lines(const std::vector<DepEdge>& edges, const KernelCfg& cfg);

struct SampleSpec {
  uint64_t offset = 0;
  std::map<std::string, uint64_t> counts;
  std::optional<uint64_t> exec_count;
  std::optional<double> efficiency;
};

// Profile JSON for kernel `name`; latency_samples is the sum of counts.
std::string profile_json(const std::string& name, Dialect dialect, uint64_t period,
                         const std::vector<SampleSpec>& samples);

// Files under tests/data.
std::string data_path(const std::string& relative);
std::string read_data(const std::string& relative);

}  // namespace stallslice::testing
