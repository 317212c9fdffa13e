// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// Stall reports: hotspot ranking plus text and structured renderings.
//
// The structured form is JSON with fixed key order:
//
//   {"format": "stallslice-report/1",
//    "reports": [{"kernel", "vendor", "period_cycles", "total_stall_cycles",
//                 "instructions", "sampled_instructions", "edges_built",
//                 "edges_after_pruning", "config", "coverage", "hotspots",
//                 "diagnostics"}, ...]}

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stallslice/blame.h"
#include "stallslice/config.h"
#include "stallslice/coverage.h"
#include "stallslice/depgraph.h"
#include "stallslice/error.h"
#include "stallslice/prune.h"

namespace stallslice {

inline constexpr const char* kReportFormat = "stallslice-report/1";

struct CauseView {
  std::optional<uint64_t> producer_offset;  // absent for self-blame
  std::string producer_mnemonic;
  std::string kind;  // edge kind or self-blame subcategory
  std::string reg;   // empty when the edge has no register
  double blame_cycles = 0.0;
  double percent = 0.0;
  std::optional<BlameFactors> factors;
  std::optional<SourceLocation> src_loc;

  bool operator==(const CauseView&) const = default;
};

struct HopView {
  uint64_t offset = 0;
  std::string mnemonic;
  std::optional<SourceLocation> src_loc;
  std::string via;  // edge kind into the previous hop; empty at the start
  std::string reg;
  double blame_cycles = 0.0;
  double share_percent = 100.0;
  std::string self;  // self-blame subcategory, if the walk ended here

  bool operator==(const HopView&) const = default;
};

struct Hotspot {
  uint64_t offset = 0;
  std::string mnemonic;
  std::optional<SourceLocation> src_loc;
  double stall_cycles = 0.0;
  double share_percent = 0.0;  // of the kernel's total stall cycles
  std::vector<std::pair<std::string, uint64_t>> breakdown;  // nonzero common classes
  std::vector<CauseView> causes;
  std::vector<HopView> chain;

  bool operator==(const Hotspot&) const = default;
};

struct ConfigEcho {
  std::string stages;
  bool prune_exec = false;
  size_t max_paths = 0;
  size_t max_depth = 0;
  size_t scan_cap = 0;
  bool include_unsampled = false;
  std::vector<std::pair<std::string, double>> latency_table;

  bool operator==(const ConfigEcho&) const = default;
};

struct StallReport {
  std::string kernel_name;
  std::string vendor;
  uint64_t period_cycles = 1;
  double total_stall_cycles = 0.0;
  size_t instructions = 0;
  size_t sampled_instructions = 0;
  size_t edges_built = 0;
  size_t edges_after_pruning = 0;
  ConfigEcho config;
  Coverage sdc_before;
  Coverage sdc_after;
  std::vector<Hotspot> hotspots;
  Diagnostics diagnostics;

  bool operator==(const StallReport&) const = default;
};

// Top `top_n` instructions by stall cycles (ties: lower offset first).
std::vector<Hotspot> rank_hotspots(const DependencyGraph& graph, const std::vector<BlameEntry>& blame,
                                   size_t top_n, size_t chain_depth);

// trace_chain output with offsets, mnemonics and register names resolved.
std::vector<HopView> chain_view(const DependencyGraph& graph, const std::vector<BlameEntry>& blame,
                                size_t start, size_t chain_depth);

ConfigEcho echo_config(const AnalysisOptions& options, Dialect dialect);

std::string render_text(const StallReport& report);
std::string render_text(const std::vector<StallReport>& reports);

std::string render_structured(const std::vector<StallReport>& reports);
std::string render_structured(const StallReport& report);
// Throws InputError on malformed documents.
std::vector<StallReport> parse_structured(std::string_view text);

// Single-chain and coverage-only outputs of the CLI.
struct ChainReport {
  std::string kernel_name;
  std::vector<HopView> chain;
};
struct CoverageReport {
  std::string kernel_name;
  Coverage before;
  Coverage after;
};
std::string render_chain_text(const std::vector<ChainReport>& chains);
std::string render_chain_structured(const std::vector<ChainReport>& chains);
std::string render_coverage_text(const std::vector<CoverageReport>& reports);
std::string render_coverage_structured(const std::vector<CoverageReport>& reports);

}  // namespace stallslice
