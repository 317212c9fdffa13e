// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.h"

#include <algorithm>
#include <memory>
#include <optional>

#include <CLI11.hpp>

#include "stallslice/config.h"
#include "stallslice/disasm.h"
#include "stallslice/opcode_table.h"
#include "stallslice/pipeline.h"
#include "stallslice/profile.h"
#include "stallslice/report.h"

namespace stallslice::cli {

namespace {

struct Flags {
  std::string vendor;
  std::string disasm;
  std::string profile;
  std::string config;
  std::string opcode_table;
  std::string kernel;
  std::string format = "text";
  std::optional<size_t> top;
  std::optional<size_t> chain_depth;
  std::optional<std::string> stages;
  bool prune_exec = false;
  bool include_unsampled = false;
  std::string phase = "both";
  std::string at;
};

void add_common(CLI::App* cmd, Flags& f, bool profile_required) {
  cmd->add_option("--vendor", f.vendor, "ISA dialect of the listing: nvidia, amd or intel")->required();
  cmd->add_option("--disasm", f.disasm, "disassembly listing")->required();
  auto* prof = cmd->add_option("--profile", f.profile, "PC-sampling profile (JSON)");
  if (profile_required) prof->required();
  cmd->add_option("--config", f.config, "key = value configuration file");
  cmd->add_option("--opcode-table", f.opcode_table, "opcode classification table replacing the bundled one");
  cmd->add_option("--kernel", f.kernel, "analyze only this kernel section");
  cmd->add_option("--format", f.format, "output format")->check(CLI::IsMember({"text", "structured"}));
  cmd->add_option("--top", f.top, "number of hotspots to report");
  cmd->add_option("--chain-depth", f.chain_depth, "maximum hops per dependency chain");
  cmd->add_option("--stages", f.stages, "pruning stages to run, e.g. 1,3 or none");
  cmd->add_flag("--prune-exec", f.prune_exec, "enable zero-execution pruning (stage 4)");
  cmd->add_flag("--include-unsampled", f.include_unsampled, "count unsampled instructions in coverage");
}

uint64_t parse_offset(const std::string& text) {
  size_t used = 0;
  uint64_t v = 0;
  try {
    v = std::stoull(text, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw InputError("--at: '" + text + "' is not an offset (use 0x... or decimal)");
  return v;
}

std::vector<KernelAnalysis> run_analysis(const Flags& f, AnalysisOptions& options) {
  const auto dialect = dialect_from_string(f.vendor);
  if (!dialect) throw InputError("--vendor: unknown vendor '" + f.vendor + "' (expected nvidia, amd or intel)");

  if (!f.config.empty()) apply_config_file(f.config, options);
  if (f.top) options.top_n = *f.top;
  if (f.chain_depth) options.chain_depth = *f.chain_depth;
  if (f.stages) options.prune.stages = parse_stage_list(*f.stages);
  if (f.prune_exec) options.prune.prune_exec = true;
  if (f.include_unsampled) options.include_unsampled = true;

  std::optional<OpcodeTable> table;
  ParseOptions parse_options;
  parse_options.source_name = f.disasm;
  if (!f.opcode_table.empty()) {
    table = OpcodeTable::load_file(f.opcode_table);
    parse_options.opcode_table = &*table;
  }
  auto kernels = parse_listing(*dialect, read_text_file(f.disasm), parse_options);
  if (kernels.empty()) throw InputError(f.disasm + ": no .kernel section found");

  std::vector<KernelProfile> profiles;
  if (!f.profile.empty()) profiles = load_profile_file(f.profile);

  if (!f.kernel.empty()) {
    auto it = std::find_if(kernels.begin(), kernels.end(), [&](const ParsedKernel& k) { return k.name == f.kernel; });
    if (it == kernels.end()) {
      std::string names;
      for (const auto& k : kernels) names += (names.empty() ? "" : ", ") + k.name;
      throw InputError("--kernel: '" + f.kernel + "' is not in " + f.disasm + " (available: " + names + ")");
    }
    kernels = {std::move(*it)};
    std::erase_if(profiles, [&](const KernelProfile& p) { return p.kernel_name != f.kernel; });
  }
  return analyze_all(kernels, profiles, options);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Post-mortem GPU stall root-cause analysis", "stallslice"};
  app.require_subcommand(1);
  Flags f;

  auto* analyze_cmd = app.add_subcommand("analyze", "rank stalled instructions and trace their causes");
  add_common(analyze_cmd, f, true);
  auto* graph_cmd = app.add_subcommand("dump-graph", "list dependency edges before and after pruning");
  add_common(graph_cmd, f, false);
  graph_cmd->add_option("--phase", f.phase, "which edge set to print")->check(CLI::IsMember({"pre", "post", "both"}));
  auto* sdc_cmd = app.add_subcommand("sdc", "report single-dependency coverage only");
  add_common(sdc_cmd, f, true);
  auto* chain_cmd = app.add_subcommand("chain", "trace the dependency chain of one instruction");
  add_common(chain_cmd, f, true);
  chain_cmd->add_option("--at", f.at, "offset of the stalled instruction")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "stallslice: " << e.what() << "\n";
    return kExitInput;
  }

  const bool structured = f.format == "structured";
  try {
    AnalysisOptions options;
    std::vector<KernelAnalysis> results = run_analysis(f, options);

    if (analyze_cmd->parsed()) {
      std::vector<StallReport> reports;
      for (const auto& r : results) reports.push_back(r.report);
      out << (structured ? render_structured(reports) : render_text(reports));
    } else if (graph_cmd->parsed()) {
      for (const auto& r : results) {
        out << ".kernel " << r.report.kernel_name << "\n";
        if (f.phase != "post") out << "# built: " << r.built.edges.size() << " edges\n" << dump_graph(r.built);
        if (f.phase != "pre") {
          const std::string stages = options.prune.stage_list();
          out << "# pruned (stages " << (stages.empty() ? "none" : stages) << "): " << r.pruned.graph.edges.size()
              << " edges\n"
              << dump_graph(r.pruned.graph);
        }
      }
    } else if (sdc_cmd->parsed()) {
      std::vector<CoverageReport> reports;
      for (const auto& r : results) reports.push_back({r.report.kernel_name, r.report.sdc_before, r.report.sdc_after});
      out << (structured ? render_coverage_structured(reports) : render_coverage_text(reports));
    } else if (chain_cmd->parsed()) {
      if (results.size() != 1) throw InputError("chain: the listing has several kernels; pick one with --kernel");
      const KernelAnalysis& r = results.front();
      const uint64_t offset = parse_offset(f.at);
      const size_t index = r.kernel->cfg.index_of_offset(offset);
      if (index >= r.kernel->cfg.instructions.size()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "0x%04llx", static_cast<unsigned long long>(offset));
        throw InputError(std::string("--at: no instruction at offset ") + buf + " in kernel " + r.report.kernel_name);
      }
      std::vector<ChainReport> chains{
          {r.report.kernel_name, chain_view(r.pruned.graph, r.blame, index, options.chain_depth)}};
      out << (structured ? render_chain_structured(chains) : render_chain_text(chains));
    }
  } catch (const InputError& e) {
    err << "stallslice: error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InvariantError& e) {
    err << "stallslice: internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    err << "stallslice: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  out.flush();
  return kExitOk;
}

}  // namespace stallslice::cli
