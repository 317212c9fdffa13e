// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#include "stallslice/report.h"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace stallslice {

namespace {

using Json = nlohmann::ordered_json;

std::string hex_offset(uint64_t offset) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%04llx", static_cast<unsigned long long>(offset));
  return buf;
}

std::string pct(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", value);
  return buf;
}

std::string cycles(double value) {
  char buf[48];
  if (value == static_cast<double>(static_cast<long long>(value))) {
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(value));
  } else {
    std::snprintf(buf, sizeof buf, "%.1f", value);
  }
  return buf;
}

std::string kind_name(const BlameEntry& e) {
  if (const auto* k = std::get_if<EdgeKind>(&e.kind)) return to_string(*k);
  return to_string(std::get<SelfBlameSubcategory>(e.kind));
}

}  // namespace

std::vector<Hotspot> rank_hotspots(const DependencyGraph& graph, const std::vector<BlameEntry>& blame,
                                   size_t top_n, size_t chain_depth) {
  const KernelCfg& cfg = graph.cfg();
  const Dialect dialect = cfg.dialect;
  double total = 0.0;
  std::vector<size_t> stalled;
  for (size_t j = 0; j < graph.size(); ++j) {
    const double s = graph.metrics(j).stall_cycles;
    if (s > 0.0) {
      stalled.push_back(j);
      total += s;
    }
  }
  std::stable_sort(stalled.begin(), stalled.end(), [&](size_t a, size_t b) {
    const double sa = graph.metrics(a).stall_cycles, sb = graph.metrics(b).stall_cycles;
    if (sa != sb) return sa > sb;
    return cfg.instructions[a].offset < cfg.instructions[b].offset;
  });
  if (stalled.size() > top_n) stalled.resize(top_n);

  std::vector<std::pair<size_t, size_t>> range(graph.size(), {0, 0});
  for (size_t i = 0; i < blame.size();) {
    size_t k = i;
    while (k < blame.size() && blame[k].stalled == blame[i].stalled) ++k;
    range[blame[i].stalled] = {i, k};
    i = k;
  }

  std::vector<Hotspot> out;
  for (size_t j : stalled) {
    const Instruction& inst = cfg.instructions[j];
    const NodeMetrics& m = graph.metrics(j);
    Hotspot h;
    h.offset = inst.offset;
    h.mnemonic = inst.mnemonic;
    h.src_loc = inst.src_loc;
    h.stall_cycles = m.stall_cycles;
    h.share_percent = total > 0.0 ? 100.0 * m.stall_cycles / total : 0.0;
    for (int c = 0; c < kCommonStallClassCount; ++c) {
      if (m.counts[static_cast<size_t>(c)] > 0)
        h.breakdown.emplace_back(to_string(static_cast<CommonStallClass>(c)), m.counts[static_cast<size_t>(c)]);
    }

    std::vector<const BlameEntry*> entries;
    for (size_t k = range[j].first; k < range[j].second; ++k) entries.push_back(&blame[k]);
    std::stable_sort(entries.begin(), entries.end(), [&](const BlameEntry* a, const BlameEntry* b) {
      if (a->blame_cycles != b->blame_cycles) return a->blame_cycles > b->blame_cycles;
      const uint64_t oa = a->cause ? cfg.instructions[*a->cause].offset : 0;
      const uint64_t ob = b->cause ? cfg.instructions[*b->cause].offset : 0;
      return oa < ob;
    });
    for (const BlameEntry* e : entries) {
      CauseView c;
      if (e->cause) {
        const Instruction& p = cfg.instructions[*e->cause];
        c.producer_offset = p.offset;
        c.producer_mnemonic = p.mnemonic;
        c.src_loc = p.src_loc;
      } else {
        c.producer_mnemonic = inst.mnemonic;
        c.src_loc = inst.src_loc;
      }
      c.kind = kind_name(*e);
      if (e->reg) c.reg = format_register(*e->reg, dialect);
      c.blame_cycles = e->blame_cycles;
      c.percent = m.stall_cycles > 0.0 ? 100.0 * e->blame_cycles / m.stall_cycles : 0.0;
      c.factors = e->factors;
      h.causes.push_back(std::move(c));
    }

    h.chain = chain_view(graph, blame, j, chain_depth);
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<HopView> chain_view(const DependencyGraph& graph, const std::vector<BlameEntry>& blame,
                                size_t start, size_t chain_depth) {
  const KernelCfg& cfg = graph.cfg();
  std::vector<HopView> out;
  for (const auto& hop : trace_chain(graph, blame, start, chain_depth)) {
    const Instruction& at = cfg.instructions[hop.instruction];
    HopView v;
    v.offset = at.offset;
    v.mnemonic = at.mnemonic;
    v.src_loc = at.src_loc;
    if (hop.via) v.via = to_string(*hop.via);
    if (hop.reg) v.reg = format_register(*hop.reg, cfg.dialect);
    v.blame_cycles = hop.blame_cycles;
    v.share_percent = 100.0 * hop.share;
    if (hop.self) v.self = to_string(*hop.self);
    out.push_back(std::move(v));
  }
  return out;
}

ConfigEcho echo_config(const AnalysisOptions& options, Dialect dialect) {
  ConfigEcho c;
  c.stages = options.prune.stage_list();
  c.prune_exec = options.prune.prune_exec;
  c.max_paths = options.prune.max_paths;
  c.max_depth = options.prune.max_depth;
  c.scan_cap = options.graph.scan_cap;
  c.include_unsampled = options.include_unsampled;
  const LatencyTable& table = options.prune.table(dialect);
  for (int k = 0; k < kOpcodeClassCount; ++k) {
    const auto cls = static_cast<OpcodeClass>(k);
    c.latency_table.emplace_back(to_string(cls), table.at(cls));
  }
  return c;
}

namespace {

void write_chain(std::ostream& out, const std::vector<HopView>& chain, const char* indent) {
  for (size_t k = 0; k < chain.size(); ++k) {
    const HopView& hop = chain[k];
    out << indent << (k == 0 ? "   " : "<- ") << hex_offset(hop.offset) << "  " << hop.mnemonic;
    if (hop.src_loc) out << "  " << format_location(*hop.src_loc);
    if (k == 0) {
      out << "  stalled " << cycles(hop.blame_cycles) << " cycles";
    } else {
      out << "  " << hop.via;
      if (!hop.reg.empty()) out << ' ' << hop.reg;
      out << ' ' << pct(hop.share_percent);
    }
    if (!hop.self.empty()) out << "  [self: " << hop.self << "]";
    out << '\n';
  }
}

std::string coverage_text(const Coverage& c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f (%zu/%zu%s)", c.value, c.covered, c.considered,
                c.vacuous ? ", vacuous" : "");
  return buf;
}

}  // namespace

std::string render_text(const StallReport& r) {
  std::ostringstream out;
  out << "kernel " << r.kernel_name << " (" << r.vendor << "), sampling period " << r.period_cycles
      << " cycles\n";
  out << "total stall cycles: " << cycles(r.total_stall_cycles) << " over " << r.sampled_instructions
      << " sampled of " << r.instructions << " instructions\n";
  out << "dependency edges: " << r.edges_built << " built, " << r.edges_after_pruning
      << " after pruning (stages " << (r.config.stages.empty() ? "none" : r.config.stages)
      << (r.config.prune_exec ? ", zero-exec pruning on" : "") << ")\n";
  const auto cov = coverage_text;
  out << "single-dependency coverage: " << cov(r.sdc_before) << " before pruning, " << cov(r.sdc_after)
      << " after\n";

  if (r.total_stall_cycles <= 0.0) {
    out << "\nno samples: nothing to attribute\n";
  }
  for (size_t i = 0; i < r.hotspots.size(); ++i) {
    const Hotspot& h = r.hotspots[i];
    out << "\n#" << (i + 1) << "  " << hex_offset(h.offset) << "  " << h.mnemonic;
    if (h.src_loc) out << "  " << format_location(*h.src_loc);
    out << "\n    stall cycles: " << cycles(h.stall_cycles) << " (" << pct(h.share_percent)
        << " of kernel)\n";
    uint64_t samples = 0;
    for (const auto& [name, n] : h.breakdown) samples += n;
    out << "    stall breakdown:";
    for (size_t k = 0; k < h.breakdown.size(); ++k) {
      out << (k ? ", " : " ") << h.breakdown[k].first << ' '
          << pct(100.0 * static_cast<double>(h.breakdown[k].second) / static_cast<double>(samples));
    }
    out << '\n';
    out << "    causes:\n";
    for (const auto& c : h.causes) {
      const std::string share = pct(c.percent);
      out << std::string(share.size() < 6 ? 12 - share.size() : 6, ' ') << share << "  ";
      if (c.producer_offset) {
        out << hex_offset(*c.producer_offset) << "  " << c.producer_mnemonic << "  " << c.kind;
        if (!c.reg.empty()) out << ' ' << c.reg;
      } else {
        out << "self  " << c.kind;
      }
      if (c.src_loc) out << "  " << format_location(*c.src_loc);
      out << '\n';
    }
    out << "    chain:\n";
    write_chain(out, h.chain, "      ");
  }
  if (!r.diagnostics.empty()) {
    out << "\ndiagnostics (" << r.diagnostics.size() << "):\n";
    for (const auto& d : r.diagnostics) {
      out << "  " << to_string(d.kind);
      if (d.offset) out << ' ' << hex_offset(*d.offset);
      out << ": " << d.message << '\n';
    }
  }
  return out.str();
}

std::string render_text(const std::vector<StallReport>& reports) {
  std::string out;
  for (size_t i = 0; i < reports.size(); ++i) {
    if (i) out += "\n";
    out += render_text(reports[i]);
  }
  return out;
}

namespace {

Json location_json(const std::optional<SourceLocation>& loc) {
  if (!loc) return nullptr;
  Json j;
  j["file"] = loc->file;
  j["line"] = loc->line;
  j["inline"] = Json::array();
  for (const auto& f : loc->inline_stack) j["inline"].push_back(Json{{"file", f.file}, {"line", f.line}});
  return j;
}

Json chain_json(const std::vector<HopView>& chain) {
  Json out = Json::array();
  for (const auto& hop : chain) {
    Json pj;
    pj["offset"] = hex_offset(hop.offset);
    pj["mnemonic"] = hop.mnemonic;
    pj["src_loc"] = location_json(hop.src_loc);
    pj["via"] = hop.via;
    pj["reg"] = hop.reg;
    pj["blame_cycles"] = hop.blame_cycles;
    pj["share_percent"] = hop.share_percent;
    pj["self"] = hop.self;
    out.push_back(std::move(pj));
  }
  return out;
}

Json coverage_json(const Coverage& c) {
  Json j;
  j["value"] = c.value;
  j["covered"] = c.covered;
  j["considered"] = c.considered;
  j["vacuous"] = c.vacuous;
  return j;
}

Json report_json(const StallReport& r) {
  Json j;
  j["kernel"] = r.kernel_name;
  j["vendor"] = r.vendor;
  j["period_cycles"] = r.period_cycles;
  j["total_stall_cycles"] = r.total_stall_cycles;
  j["instructions"] = r.instructions;
  j["sampled_instructions"] = r.sampled_instructions;
  j["edges_built"] = r.edges_built;
  j["edges_after_pruning"] = r.edges_after_pruning;

  Json config;
  config["stages"] = r.config.stages;
  config["prune_exec"] = r.config.prune_exec;
  config["max_paths"] = r.config.max_paths;
  config["max_depth"] = r.config.max_depth;
  config["scan_cap"] = r.config.scan_cap;
  config["include_unsampled"] = r.config.include_unsampled;
  config["latency_table"] = Json::object();
  for (const auto& [name, v] : r.config.latency_table) config["latency_table"][name] = v;
  j["config"] = std::move(config);

  j["coverage"] = Json{{"before", coverage_json(r.sdc_before)}, {"after", coverage_json(r.sdc_after)}};

  j["hotspots"] = Json::array();
  for (const auto& h : r.hotspots) {
    Json hj;
    hj["offset"] = hex_offset(h.offset);
    hj["mnemonic"] = h.mnemonic;
    hj["src_loc"] = location_json(h.src_loc);
    hj["stall_cycles"] = h.stall_cycles;
    hj["share_percent"] = h.share_percent;
    hj["breakdown"] = Json::object();
    for (const auto& [name, n] : h.breakdown) hj["breakdown"][name] = n;
    hj["causes"] = Json::array();
    for (const auto& c : h.causes) {
      Json cj;
      cj["producer_offset"] = c.producer_offset ? Json(hex_offset(*c.producer_offset)) : Json(nullptr);
      cj["producer_mnemonic"] = c.producer_mnemonic;
      cj["kind"] = c.kind;
      cj["reg"] = c.reg;
      cj["blame_cycles"] = c.blame_cycles;
      cj["percent"] = c.percent;
      if (c.factors) {
        cj["factors"] = Json{{"dist", c.factors->dist},
                             {"eff", c.factors->eff},
                             {"isu", c.factors->isu},
                             {"match", c.factors->match}};
      } else {
        cj["factors"] = nullptr;
      }
      cj["src_loc"] = location_json(c.src_loc);
      hj["causes"].push_back(std::move(cj));
    }
    hj["chain"] = chain_json(h.chain);
    j["hotspots"].push_back(std::move(hj));
  }

  j["diagnostics"] = Json::array();
  for (const auto& d : r.diagnostics) {
    Json dj;
    dj["kind"] = to_string(d.kind);
    dj["offset"] = d.offset ? Json(hex_offset(*d.offset)) : Json(nullptr);
    dj["message"] = d.message;
    j["diagnostics"].push_back(std::move(dj));
  }
  return j;
}

uint64_t offset_from(const Json& j) {
  const std::string s = j.get<std::string>();
  size_t used = 0;
  const uint64_t v = std::stoull(s, &used, 16);
  if (used != s.size()) throw InputError("malformed offset '" + s + "'");
  return v;
}

std::optional<SourceLocation> location_from(const Json& j) {
  if (j.is_null()) return std::nullopt;
  SourceLocation loc;
  loc.file = j.at("file").get<std::string>();
  loc.line = j.at("line").get<uint32_t>();
  for (const auto& f : j.at("inline")) loc.inline_stack.push_back({f.at("file").get<std::string>(), f.at("line").get<uint32_t>()});
  return loc;
}

Coverage coverage_from(const Json& j) {
  Coverage c;
  c.value = j.at("value").get<double>();
  c.covered = j.at("covered").get<size_t>();
  c.considered = j.at("considered").get<size_t>();
  c.vacuous = j.at("vacuous").get<bool>();
  return c;
}

StallReport report_from(const Json& j) {
  StallReport r;
  r.kernel_name = j.at("kernel").get<std::string>();
  r.vendor = j.at("vendor").get<std::string>();
  r.period_cycles = j.at("period_cycles").get<uint64_t>();
  r.total_stall_cycles = j.at("total_stall_cycles").get<double>();
  r.instructions = j.at("instructions").get<size_t>();
  r.sampled_instructions = j.at("sampled_instructions").get<size_t>();
  r.edges_built = j.at("edges_built").get<size_t>();
  r.edges_after_pruning = j.at("edges_after_pruning").get<size_t>();

  const Json& config = j.at("config");
  r.config.stages = config.at("stages").get<std::string>();
  r.config.prune_exec = config.at("prune_exec").get<bool>();
  r.config.max_paths = config.at("max_paths").get<size_t>();
  r.config.max_depth = config.at("max_depth").get<size_t>();
  r.config.scan_cap = config.at("scan_cap").get<size_t>();
  r.config.include_unsampled = config.at("include_unsampled").get<bool>();
  for (const auto& [name, v] : config.at("latency_table").items())
    r.config.latency_table.emplace_back(name, v.get<double>());

  r.sdc_before = coverage_from(j.at("coverage").at("before"));
  r.sdc_after = coverage_from(j.at("coverage").at("after"));

  for (const auto& hj : j.at("hotspots")) {
    Hotspot h;
    h.offset = offset_from(hj.at("offset"));
    h.mnemonic = hj.at("mnemonic").get<std::string>();
    h.src_loc = location_from(hj.at("src_loc"));
    h.stall_cycles = hj.at("stall_cycles").get<double>();
    h.share_percent = hj.at("share_percent").get<double>();
    for (const auto& [name, n] : hj.at("breakdown").items()) h.breakdown.emplace_back(name, n.get<uint64_t>());
    for (const auto& cj : hj.at("causes")) {
      CauseView c;
      if (!cj.at("producer_offset").is_null()) c.producer_offset = offset_from(cj.at("producer_offset"));
      c.producer_mnemonic = cj.at("producer_mnemonic").get<std::string>();
      c.kind = cj.at("kind").get<std::string>();
      c.reg = cj.at("reg").get<std::string>();
      c.blame_cycles = cj.at("blame_cycles").get<double>();
      c.percent = cj.at("percent").get<double>();
      if (!cj.at("factors").is_null()) {
        const Json& f = cj.at("factors");
        c.factors = BlameFactors{f.at("dist").get<double>(), f.at("eff").get<double>(),
                                 f.at("isu").get<double>(), f.at("match").get<double>()};
      }
      c.src_loc = location_from(cj.at("src_loc"));
      h.causes.push_back(std::move(c));
    }
    for (const auto& pj : hj.at("chain")) {
      HopView hop;
      hop.offset = offset_from(pj.at("offset"));
      hop.mnemonic = pj.at("mnemonic").get<std::string>();
      hop.src_loc = location_from(pj.at("src_loc"));
      hop.via = pj.at("via").get<std::string>();
      hop.reg = pj.at("reg").get<std::string>();
      hop.blame_cycles = pj.at("blame_cycles").get<double>();
      hop.share_percent = pj.at("share_percent").get<double>();
      hop.self = pj.at("self").get<std::string>();
      h.chain.push_back(std::move(hop));
    }
    r.hotspots.push_back(std::move(h));
  }

  for (const auto& dj : j.at("diagnostics")) {
    Diagnostic d;
    auto kind = diagnostic_kind_from_string(dj.at("kind").get<std::string>());
    if (!kind) throw InputError("unknown diagnostic kind '" + dj.at("kind").get<std::string>() + "'");
    d.kind = *kind;
    if (!dj.at("offset").is_null()) d.offset = offset_from(dj.at("offset"));
    d.message = dj.at("message").get<std::string>();
    r.diagnostics.push_back(std::move(d));
  }
  return r;
}

}  // namespace

std::string render_structured(const std::vector<StallReport>& reports) {
  Json doc;
  doc["format"] = kReportFormat;
  doc["reports"] = Json::array();
  for (const auto& r : reports) doc["reports"].push_back(report_json(r));
  return doc.dump(2) + "\n";
}

std::string render_structured(const StallReport& report) {
  return render_structured(std::vector<StallReport>{report});
}

std::vector<StallReport> parse_structured(std::string_view text) {
  try {
    const Json doc = Json::parse(text.begin(), text.end());
    if (doc.at("format").get<std::string>() != kReportFormat)
      throw InputError("unsupported report format '" + doc.at("format").get<std::string>() + "'");
    std::vector<StallReport> out;
    for (const auto& r : doc.at("reports")) out.push_back(report_from(r));
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed structured report: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw InputError("malformed structured report: bad offset");
  } catch (const std::out_of_range&) {
    throw InputError("malformed structured report: offset out of range");
  }
}

std::string render_chain_text(const std::vector<ChainReport>& chains) {
  std::ostringstream out;
  for (size_t i = 0; i < chains.size(); ++i) {
    if (i) out << '\n';
    out << "kernel " << chains[i].kernel_name << " chain:\n";
    write_chain(out, chains[i].chain, "  ");
  }
  return out.str();
}

std::string render_chain_structured(const std::vector<ChainReport>& chains) {
  Json doc;
  doc["format"] = "stallslice-chain/1";
  doc["chains"] = Json::array();
  for (const auto& c : chains) doc["chains"].push_back(Json{{"kernel", c.kernel_name}, {"chain", chain_json(c.chain)}});
  return doc.dump(2) + "\n";
}

std::string render_coverage_text(const std::vector<CoverageReport>& reports) {
  std::ostringstream out;
  for (const auto& r : reports) {
    out << r.kernel_name << ": before " << coverage_text(r.before) << ", after " << coverage_text(r.after)
        << '\n';
  }
  return out.str();
}

std::string render_coverage_structured(const std::vector<CoverageReport>& reports) {
  Json doc;
  doc["format"] = "stallslice-coverage/1";
  doc["kernels"] = Json::array();
  for (const auto& r : reports) {
    doc["kernels"].push_back(
        Json{{"kernel", r.kernel_name}, {"before", coverage_json(r.before)}, {"after", coverage_json(r.after)}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace stallslice
