// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// Single-dependency coverage: the share of nodes whose incoming edges let
// blame go to one edge without apportionment. A node with incoming edges is
// covered when every edge has the same dependency class, or when no class
// occurs on more than one of its edges.

#pragma once

#include <cstddef>

#include "stallslice/depgraph.h"

namespace stallslice {

struct Coverage {
  double value = 1.0;
  size_t covered = 0;
  size_t considered = 0;  // nodes with at least one incoming edge
  bool vacuous = true;    // no node considered; value is defined as 1

  bool operator==(const Coverage&) const = default;
};

// By default only sampled instructions are counted.
Coverage single_dep_coverage(const DependencyGraph& graph, bool include_unsampled = false);

}  // namespace stallslice
