// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#include "stallslice/profile.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace stallslice {

namespace {

using Json = nlohmann::json;

struct CategoryRule {
  const char* canonical;
  CommonStallClass cls;
  std::vector<const char*> aliases;
};

const std::vector<CategoryRule>& rules_for(Dialect vendor) {
  using C = CommonStallClass;
  static const std::vector<CategoryRule> nvidia = {
      {"instruction fetch", C::kInstructionFetch, {"inst fetch"}},
      {"execution dependency", C::kExecutionDep, {"exec dependency"}},
      {"memory dependency", C::kMemoryDep, {}},
      {"texture", C::kMemoryDep, {}},
      {"synchronization", C::kSynchronization, {"sync"}},
      {"constant memory dependency", C::kMemoryDep, {}},
      {"pipe busy", C::kPipelineBusy, {}},
      {"memory throttle", C::kMemoryDep, {}},
      {"not selected", C::kNotSelected, {}},
      {"sleeping", C::kIdle, {}},
      {"other", C::kOther, {}},
  };
  static const std::vector<CategoryRule> amd = {
      {"no instruction available", C::kInstructionFetch, {}},
      {"ALU dependency", C::kExecutionDep, {}},
      {"waiting for memory", C::kMemoryDep, {}},
      {"internal instruction", C::kOther, {}},
      {"barrier wait", C::kSynchronization, {}},
      {"not selected", C::kNotSelected, {}},
      {"pipeline stall", C::kPipelineBusy, {}},
      {"sleep", C::kIdle, {}},
      {"other", C::kOther, {}},
  };
  static const std::vector<CategoryRule> intel = {
      {"ControlStall", C::kOther, {"control flow"}},
      {"PipeStall", C::kExecutionDep, {"pipeline hazard", "pipeline hazards"}},
      {"SendStall", C::kMemoryDep, {"memory send", "memory send operations"}},
      {"SbidStall", C::kSynchronization, {"scoreboard id dependency", "scoreboard id dependencies"}},
      {"SyncStall", C::kSynchronization, {"synchronization"}},
      {"InstFetchStall", C::kInstructionFetch, {"instruction fetch"}},
      {"DistStall", C::kPipelineBusy, {"distribution"}},
      {"OtherStall", C::kOther, {"other"}},
  };
  switch (vendor) {
    case Dialect::kNvidia: return nvidia;
    case Dialect::kAmd: return amd;
    case Dialect::kIntel: return intel;
  }
  return nvidia;
}

// Case, spaces, '_' and '-' are ignored: "SbidStall" == "sbid_stall".
std::string normalize(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '_' || c == '-' || std::isspace(static_cast<unsigned char>(c))) continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

const CategoryRule* find_rule(Dialect vendor, std::string_view category) {
  const std::string key = normalize(category);
  for (const auto& rule : rules_for(vendor)) {
    if (normalize(rule.canonical) == key) return &rule;
    for (const char* alias : rule.aliases) {
      if (normalize(alias) == key) return &rule;
    }
  }
  return nullptr;
}

constexpr std::array<const char*, kCommonStallClassCount> kClassNames = {
    "memory_dep",    "execution_dep", "synchronization", "instruction_fetch",
    "pipeline_busy", "not_selected",  "idle",            "other",
};

[[noreturn]] void schema_error(const std::string& source, const std::string& where,
                               const std::string& what) {
  throw InputError(source + ": " + where + ": " + what);
}

uint64_t parse_offset(const Json& value, const std::string& source, const std::string& where) {
  if (!value.is_string()) schema_error(source, where, "offset must be a hex string");
  std::string_view s = value.get_ref<const std::string&>();
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) s.remove_prefix(2);
  uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out, 16);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    schema_error(source, where, "offset '" + value.get<std::string>() + "' is not a hex number");
  return out;
}

uint64_t parse_count(const Json& value, const std::string& source, const std::string& where) {
  if (value.is_number_unsigned()) return value.get<uint64_t>();
  if (value.is_number_integer()) schema_error(source, where, "negative count");
  schema_error(source, where, "expected a nonnegative integer");
}

void check_keys(const Json& obj, std::initializer_list<const char*> allowed,
                const std::string& source, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      schema_error(source, where, "unknown field '" + key + "'");
  }
}

const Json& require(const Json& obj, const char* key, const std::string& source,
                    const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(source, where, std::string("missing field '") + key + "'");
  return *it;
}

KernelProfile parse_kernel(const Json& obj, const std::string& source, const std::string& where) {
  if (!obj.is_object()) schema_error(source, where, "expected a kernel object");
  check_keys(obj, {"kernel", "vendor", "period_cycles", "samples"}, source, where);

  KernelProfile prof;
  const Json& kernel = require(obj, "kernel", source, where);
  if (!kernel.is_string() || kernel.get_ref<const std::string&>().empty())
    schema_error(source, where, "kernel must be a non-empty string");
  prof.kernel_name = kernel.get<std::string>();

  const Json& vendor = require(obj, "vendor", source, where);
  auto dialect = vendor.is_string() ? dialect_from_string(vendor.get_ref<const std::string&>())
                                    : std::nullopt;
  if (!dialect) schema_error(source, where, "vendor must be one of nvidia, amd, intel");
  prof.dialect = *dialect;

  prof.period_cycles = parse_count(require(obj, "period_cycles", source, where), source,
                                   where + ".period_cycles");
  if (prof.period_cycles == 0) schema_error(source, where, "period_cycles must be positive");

  const Json& samples = require(obj, "samples", source, where);
  if (!samples.is_array()) schema_error(source, where, "samples must be an array");
  std::set<uint64_t> seen;
  for (size_t i = 0; i < samples.size(); ++i) {
    const std::string at = where + ".samples[" + std::to_string(i) + "]";
    const Json& s = samples[i];
    if (!s.is_object()) schema_error(source, at, "expected an object");
    check_keys(s, {"offset", "counts", "latency_samples", "total_samples", "exec_count", "efficiency"},
               source, at);
    InstructionSamples rec;
    rec.offset = parse_offset(require(s, "offset", source, at), source, at);
    if (!seen.insert(rec.offset).second) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(rec.offset));
      schema_error(source, at, std::string("duplicate offset ") + buf);
    }
    const Json& counts = require(s, "counts", source, at);
    if (!counts.is_object()) schema_error(source, at, "counts must be an object");
    uint64_t sum = 0;
    for (const auto& [name, value] : counts.items()) {
      auto canonical = canonical_category(prof.dialect, name);
      if (!canonical) {
        schema_error(source, at,
                     "unknown " + std::string(to_string(prof.dialect)) + " stall category '" + name + "'");
      }
      if (rec.vendor_counts.count(*canonical))
        schema_error(source, at, "category '" + *canonical + "' listed twice");
      const uint64_t n = parse_count(value, source, at + ".counts." + name);
      rec.vendor_counts[*canonical] = n;
      sum += n;
    }
    rec.latency_samples = parse_count(require(s, "latency_samples", source, at), source, at);
    if (sum != rec.latency_samples) {
      schema_error(source, at,
                   "category counts sum to " + std::to_string(sum) + " but latency_samples is " +
                       std::to_string(rec.latency_samples));
    }
    rec.total_samples = rec.latency_samples;
    if (auto it = s.find("total_samples"); it != s.end())
      rec.total_samples = parse_count(*it, source, at + ".total_samples");
    if (rec.latency_samples > rec.total_samples)
      schema_error(source, at, "latency_samples exceeds total_samples");
    if (auto it = s.find("exec_count"); it != s.end())
      rec.exec_count = parse_count(*it, source, at + ".exec_count");
    if (auto it = s.find("efficiency"); it != s.end()) {
      if (!it->is_number()) schema_error(source, at, "efficiency must be a number");
      const double e = it->get<double>();
      if (!(e > 0.0 && e <= 1.0)) schema_error(source, at, "efficiency must lie in (0, 1]");
      rec.efficiency = e;
    }
    prof.samples.push_back(std::move(rec));
  }
  std::sort(prof.samples.begin(), prof.samples.end(),
            [](const auto& a, const auto& b) { return a.offset < b.offset; });
  return prof;
}

}  // namespace

const char* to_string(CommonStallClass cls) { return kClassNames[static_cast<size_t>(cls)]; }

std::optional<CommonStallClass> common_stall_class_from_string(std::string_view s) {
  for (size_t i = 0; i < kClassNames.size(); ++i) {
    if (s == kClassNames[i]) return static_cast<CommonStallClass>(i);
  }
  return std::nullopt;
}

const std::vector<std::string>& vendor_categories(Dialect vendor) {
  static const auto build = [](Dialect d) {
    std::vector<std::string> out;
    for (const auto& rule : rules_for(d)) out.emplace_back(rule.canonical);
    return out;
  };
  static const std::vector<std::string> nvidia = build(Dialect::kNvidia);
  static const std::vector<std::string> amd = build(Dialect::kAmd);
  static const std::vector<std::string> intel = build(Dialect::kIntel);
  switch (vendor) {
    case Dialect::kNvidia: return nvidia;
    case Dialect::kAmd: return amd;
    case Dialect::kIntel: return intel;
  }
  return nvidia;
}

CommonStallClass map_stall(Dialect vendor, std::string_view category) {
  const CategoryRule* rule = find_rule(vendor, category);
  if (!rule) {
    throw InputError("unknown " + std::string(to_string(vendor)) + " stall category '" +
                     std::string(category) + "'");
  }
  return rule->cls;
}

std::optional<std::string> canonical_category(Dialect vendor, std::string_view category) {
  const CategoryRule* rule = find_rule(vendor, category);
  if (!rule) return std::nullopt;
  return std::string(rule->canonical);
}

std::vector<KernelProfile> load_profiles(std::string_view text, const std::string& source_name) {
  std::vector<KernelProfile> out;
  Json doc = Json::parse(text.begin(), text.end(), nullptr, false);
  if (!doc.is_discarded()) {
    if (doc.is_array()) {
      for (size_t i = 0; i < doc.size(); ++i)
        out.push_back(parse_kernel(doc[i], source_name, "[" + std::to_string(i) + "]"));
    } else {
      out.push_back(parse_kernel(doc, source_name, "kernel"));
    }
  } else {
    // One kernel object per line.
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (std::all_of(line.begin(), line.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); }))
        continue;
      Json obj = Json::parse(line, nullptr, false);
      if (obj.is_discarded())
        throw InputError(source_name + ":" + std::to_string(line_no) + ": malformed profile document");
      out.push_back(parse_kernel(obj, source_name, "line " + std::to_string(line_no)));
    }
  }
  std::set<std::string> names;
  for (const auto& p : out) {
    if (!names.insert(p.kernel_name).second)
      throw InputError(source_name + ": kernel '" + p.kernel_name + "' profiled twice");
  }
  return out;
}

KernelProfile load_profile(std::string_view text, const std::string& source_name) {
  auto profiles = load_profiles(text, source_name);
  if (profiles.size() != 1) {
    throw InputError(source_name + ": expected exactly one kernel profile, found " +
                     std::to_string(profiles.size()));
  }
  return std::move(profiles.front());
}

std::vector<KernelProfile> load_profile_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open profile '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_profiles(buf.str(), path);
}

std::string format_profiles(const std::vector<KernelProfile>& profiles) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& prof : profiles) {
    nlohmann::ordered_json k;
    k["kernel"] = prof.kernel_name;
    k["vendor"] = to_string(prof.dialect);
    k["period_cycles"] = prof.period_cycles;
    k["samples"] = nlohmann::ordered_json::array();
    for (const auto& s : prof.samples) {
      nlohmann::ordered_json rec;
      char buf[32];
      std::snprintf(buf, sizeof buf, "0x%04llx", static_cast<unsigned long long>(s.offset));
      rec["offset"] = buf;
      rec["counts"] = nlohmann::ordered_json::object();
      for (const auto& [name, n] : s.vendor_counts) rec["counts"][name] = n;
      rec["latency_samples"] = s.latency_samples;
      rec["total_samples"] = s.total_samples;
      if (s.exec_count) rec["exec_count"] = *s.exec_count;
      if (s.efficiency) rec["efficiency"] = *s.efficiency;
      k["samples"].push_back(std::move(rec));
    }
    doc.push_back(std::move(k));
  }
  return doc.dump(1) + "\n";
}

double stall_cycles(const InstructionSamples& s, uint64_t period) {
  return static_cast<double>(s.latency_samples) * static_cast<double>(period);
}

StallCounts common_breakdown(const InstructionSamples& s, Dialect vendor) {
  StallCounts out{};
  for (const auto& [name, n] : s.vendor_counts) out[static_cast<size_t>(map_stall(vendor, name))] += n;
  return out;
}

double NodeMetrics::fraction(CommonStallClass cls) const {
  if (latency_samples == 0) return 0.0;
  return static_cast<double>(counts[static_cast<size_t>(cls)]) /
         static_cast<double>(latency_samples);
}

AnnotatedKernel attach(KernelCfg cfg, const KernelProfile& prof) {
  if (prof.kernel_name != cfg.kernel_name) {
    throw InputError("profile is for kernel '" + prof.kernel_name + "' but the listing kernel is '" +
                     cfg.kernel_name + "'");
  }
  if (prof.dialect != cfg.dialect) {
    throw InputError("profile vendor '" + std::string(to_string(prof.dialect)) +
                     "' does not match listing dialect '" + to_string(cfg.dialect) + "'");
  }
  AnnotatedKernel out;
  out.metrics.assign(cfg.instructions.size(), NodeMetrics{});
  for (const auto& s : prof.samples) {
    const size_t index = cfg.index_of_offset(s.offset);
    if (index == cfg.instructions.size()) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "0x%04llx", static_cast<unsigned long long>(s.offset));
      out.skid.push_back({DiagnosticKind::kSkid, s.offset,
                          std::to_string(s.latency_samples) + " latency samples (" +
                              std::to_string(s.total_samples) + " total) at " + buf +
                              " match no instruction"});
      continue;
    }
    NodeMetrics& m = out.metrics[index];
    m.sampled = true;
    m.latency_samples = s.latency_samples;
    m.total_samples = s.total_samples;
    m.exec_count = s.exec_count;
    m.efficiency = s.efficiency_or_default();
    m.counts = common_breakdown(s, prof.dialect);
    m.stall_cycles = stall_cycles(s, prof.period_cycles);
  }
  out.cfg = std::move(cfg);
  out.profile = prof;
  return out;
}

AnnotatedKernel attach_empty(KernelCfg cfg) {
  KernelProfile prof;
  prof.kernel_name = cfg.kernel_name;
  prof.dialect = cfg.dialect;
  prof.period_cycles = 1;
  return attach(std::move(cfg), prof);
}

}  // namespace stallslice
