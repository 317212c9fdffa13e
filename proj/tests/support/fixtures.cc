// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#include "fixtures.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "stallslice/disasm.h"
#include "stallslice/pipeline.h"

#ifndef STALLSLICE_TEST_DATA_DIR
#error "STALLSLICE_TEST_DATA_DIR must be defined"
#endif

namespace stallslice::testing {

KernelCfg cfg_of(Dialect dialect, std::string_view listing) {
  auto kernels = parse_listing(dialect, listing);
  if (kernels.empty()) throw InputError("listing has no kernel");
  return build_cfg(kernels.front());
}

std::shared_ptr<const AnnotatedKernel> annotate(KernelCfg cfg, const KernelProfile* profile) {
  if (!profile) return std::make_shared<const AnnotatedKernel>(attach_empty(std::move(cfg)));
  return std::make_shared<const AnnotatedKernel>(attach(std::move(cfg), *profile));
}

std::shared_ptr<const AnnotatedKernel> annotate(Dialect dialect, std::string_view listing,
                                                std::string_view profile_json) {
  KernelCfg cfg = cfg_of(dialect, listing);
  if (profile_json.empty()) return annotate(std::move(cfg), nullptr);
  const KernelProfile p = load_profile(profile_json);
  return annotate(std::move(cfg), &p);
}

size_t at(const KernelCfg& cfg, uint64_t offset) {
  const size_t i = cfg.index_of_offset(offset);
  if (i >= cfg.instructions.size()) {
    std::fprintf(stderr, "no instruction at offset 0x%llx\n", static_cast<unsigned long long>(offset));
    std::abort();
  }
  return i;
}

std::vector<std::string> edge_lines(const std::vector<DepEdge>& edges, const KernelCfg& cfg) {
  std::vector<std::string> out;
  for (const auto& e : edges) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "0x%04llx -> 0x%04llx kind=%s",
                  static_cast<unsigned long long>(cfg.instructions[e.producer].offset),
                  static_cast<unsigned long long>(cfg.instructions[e.consumer].offset), to_string(e.kind));
    std::string line = buf;
    line += " reg=" + (e.reg ? format_register(*e.reg, cfg.dialect) : std::string("-"));
    line += std::string(" class=") + to_string(e.dep_class);
    out.push_back(line);
  }
  return out;
}

std::vector<std::string> edge_lines(const DependencyGraph& graph, const std::vector<EdgeKind>& kinds) {
  std::vector<DepEdge> picked;
  for (const auto& e : graph.edges) {
    if (kinds.empty() || std::find(kinds.begin(), kinds.end(), e.kind) != kinds.end()) picked.push_back(e);
  }
  return edge_lines(picked, graph.cfg());
}

std::string profile_json(const std::string& name, Dialect dialect, uint64_t period,
                         const std::vector<SampleSpec>& samples) {
  KernelProfile p;
  p.kernel_name = name;
  p.dialect = dialect;
  p.period_cycles = period;
  for (const auto& s : samples) {
    InstructionSamples is;
    is.offset = s.offset;
    for (const auto& [cat, n] : s.counts) {
      is.vendor_counts[*canonical_category(dialect, cat)] += n;
      is.latency_samples += n;
    }
    is.total_samples = is.latency_samples;
    is.exec_count = s.exec_count;
    is.efficiency = s.efficiency;
    p.samples.push_back(std::move(is));
  }
  return format_profiles({p});
}

std::string data_path(const std::string& relative) { return std::string(STALLSLICE_TEST_DATA_DIR) + "/" + relative; }

std::string read_data(const std::string& relative) { return read_text_file(data_path(relative)); }

}  // namespace stallslice::testing
