// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#include "stallslice/pipeline.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <sstream>

#include "stallslice/coverage.h"

namespace stallslice {

void check_conservation(const DependencyGraph& graph, const std::vector<BlameEntry>& blame) {
  std::vector<double> sum(graph.size(), 0.0);
  for (const auto& e : blame) {
    if (e.stalled >= graph.size() || !(e.blame_cycles >= 0.0))
      throw InvariantError("blame entry with bad target or negative cycles");
    sum[e.stalled] += e.blame_cycles;
  }
  for (size_t j = 0; j < graph.size(); ++j) {
    const double s = graph.metrics(j).stall_cycles;
    if (std::fabs(sum[j] - s) > kConservationTolerance * std::max(1.0, s)) {
      throw InvariantError("blame for instruction " + std::to_string(j) + " sums to " +
                           std::to_string(sum[j]) + ", expected " + std::to_string(s));
    }
  }
}

KernelAnalysis analyze(std::shared_ptr<const AnnotatedKernel> kernel, const AnalysisOptions& options) {
  KernelAnalysis a;
  a.kernel = kernel;
  a.built = build_graph(kernel, options.graph);
  a.pruned = prune(a.built, options.prune);
  a.blame = attribute_blame(a.pruned.graph);
  check_conservation(a.pruned.graph, a.blame);

  const KernelCfg& cfg = kernel->cfg;
  StallReport& r = a.report;
  r.kernel_name = cfg.kernel_name;
  r.vendor = to_string(cfg.dialect);
  r.period_cycles = kernel->profile.period_cycles;
  r.instructions = cfg.instructions.size();
  for (const auto& m : kernel->metrics) {
    r.total_stall_cycles += m.stall_cycles;
    if (m.sampled) ++r.sampled_instructions;
  }
  r.edges_built = a.built.edges.size();
  r.edges_after_pruning = a.pruned.graph.edges.size();
  r.config = echo_config(options, cfg.dialect);
  r.sdc_before = single_dep_coverage(a.built, options.include_unsampled);
  r.sdc_after = single_dep_coverage(a.pruned.graph, options.include_unsampled);
  r.hotspots = rank_hotspots(a.pruned.graph, a.blame, options.top_n, options.chain_depth);

  auto add = [&](const Diagnostics& d) { r.diagnostics.insert(r.diagnostics.end(), d.begin(), d.end()); };
  add(kernel->skid);
  add(cfg.unreachable_diagnostics());
  add(a.built.diagnostics);
  add(a.pruned.diagnostics);
  return a;
}

KernelAnalysis analyze(AnnotatedKernel kernel, const AnalysisOptions& options) {
  return analyze(std::make_shared<const AnnotatedKernel>(std::move(kernel)), options);
}

std::vector<KernelAnalysis> analyze_all(const std::vector<ParsedKernel>& kernels,
                                        const std::vector<KernelProfile>& profiles,
                                        const AnalysisOptions& options) {
  std::map<std::string, const ParsedKernel*> by_name;
  for (const auto& k : kernels) by_name[k.name] = &k;
  std::map<std::string, const KernelProfile*> prof_by_name;
  for (const auto& p : profiles) {
    if (!by_name.count(p.kernel_name))
      throw InputError("profile for kernel '" + p.kernel_name + "' has no matching kernel in the listing");
    prof_by_name[p.kernel_name] = &p;
  }

  // Attach on the calling thread so input errors surface in order.
  std::vector<std::shared_ptr<const AnnotatedKernel>> annotated;
  for (const auto& [name, k] : by_name) {
    KernelCfg cfg = build_cfg(*k);
    auto it = prof_by_name.find(name);
    annotated.push_back(std::make_shared<const AnnotatedKernel>(
        it == prof_by_name.end() ? attach_empty(std::move(cfg)) : attach(std::move(cfg), *it->second)));
  }

  std::vector<std::future<KernelAnalysis>> jobs;
  for (const auto& k : annotated) {
    jobs.push_back(std::async(std::launch::async, [k, &options] { return analyze(k, options); }));
  }
  std::vector<KernelAnalysis> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace stallslice
