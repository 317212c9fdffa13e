// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// Analysis options and their key=value configuration file:
//
//   # comment
//   stages = 1,2,3          # pruning stages to run
//   prune_exec = true       # enable stage 4
//   max_paths = 64
//   max_depth = 512
//   scan_cap = 4096         # sync-tracing scan budget per waiting instruction
//   latency.global_load = 300            # every dialect
//   latency.amd.local_load = 12          # one dialect
//   top = 10
//   chain_depth = 16
//   include_unsampled = false

#pragma once

#include <bitset>
#include <string>
#include <string_view>

#include "stallslice/depgraph.h"
#include "stallslice/prune.h"

namespace stallslice {

struct AnalysisOptions {
  PruneOptions prune;
  GraphOptions graph;
  size_t top_n = 10;
  size_t chain_depth = 16;
  bool include_unsampled = false;
};

// "1,2,4" -> stage bits. Throws InputError on anything else.
std::bitset<4> parse_stage_list(std::string_view text);

// Applies every setting in `text` on top of `options`. Unknown keys and
// malformed values throw InputError naming the line.
void apply_config(std::string_view text, AnalysisOptions& options,
                  const std::string& source_name = "<config>");
void apply_config_file(const std::string& path, AnalysisOptions& options);

}  // namespace stallslice
