// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#include "stallslice/coverage.h"

#include <array>

namespace stallslice {

Coverage single_dep_coverage(const DependencyGraph& graph, bool include_unsampled) {
  Coverage c;
  for (size_t j = 0; j < graph.size(); ++j) {
    const auto& incoming = graph.incoming[j];
    if (incoming.empty()) continue;
    if (!include_unsampled && !graph.metrics(j).sampled) continue;
    std::array<size_t, 3> per_class{};
    for (size_t k : incoming) ++per_class[static_cast<size_t>(graph.edges[k].dep_class)];
    size_t classes = 0;
    bool distinct = true;
    for (size_t n : per_class) {
      if (n > 0) ++classes;
      if (n > 1) distinct = false;
    }
    ++c.considered;
    if (classes == 1 || distinct) ++c.covered;
  }
  if (c.considered > 0) {
    c.vacuous = false;
    c.value = static_cast<double>(c.covered) / static_cast<double>(c.considered);
  }
  return c;
}

}  // namespace stallslice
