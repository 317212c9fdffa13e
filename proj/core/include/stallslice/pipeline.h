// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end analysis: listing + profile -> graph -> pruning -> blame ->
// report.

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "stallslice/blame.h"
#include "stallslice/cfg.h"
#include "stallslice/config.h"
#include "stallslice/depgraph.h"
#include "stallslice/profile.h"
#include "stallslice/prune.h"
#include "stallslice/report.h"

namespace stallslice {

struct KernelAnalysis {
  std::shared_ptr<const AnnotatedKernel> kernel;
  DependencyGraph built;
  PruneResult pruned;
  std::vector<BlameEntry> blame;
  StallReport report;
};

// Relative tolerance of the blame conservation check.
inline constexpr double kConservationTolerance = 1e-9;

// Throws InvariantError if blame does not sum to the stall cycles of an
// instruction.
void check_conservation(const DependencyGraph& graph, const std::vector<BlameEntry>& blame);

KernelAnalysis analyze(std::shared_ptr<const AnnotatedKernel> kernel, const AnalysisOptions& options);
KernelAnalysis analyze(AnnotatedKernel kernel, const AnalysisOptions& options);

// Pairs kernels with profiles by name (a kernel without a profile is
// analyzed unsampled; a profile without a kernel is an InputError). Kernels
// are analyzed concurrently; results come back ordered by kernel name.
std::vector<KernelAnalysis> analyze_all(const std::vector<ParsedKernel>& kernels,
                                        const std::vector<KernelProfile>& profiles,
                                        const AnalysisOptions& options);

std::string read_text_file(const std::string& path);

}  // namespace stallslice
