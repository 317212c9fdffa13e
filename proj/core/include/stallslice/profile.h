// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// PC-sampling profiles: loading, vendor stall-category mapping and joining
// samples to the instructions of a KernelCfg.
//
// Profile documents are JSON. A document holds one kernel object, an array of
// kernel objects, or one kernel object per line:
//
//   {"kernel": "ltimes", "vendor": "nvidia", "period_cycles": 512,
//    "samples": [{"offset": "0x0090",
//                 "counts": {"memory dependency": 90, "execution dependency": 5},
//                 "latency_samples": 95, "total_samples": 120,
//                 "exec_count": 4096, "efficiency": 0.5}]}

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stallslice/cfg.h"
#include "stallslice/error.h"
#include "stallslice/isa.h"

namespace stallslice {

enum class CommonStallClass {
  kMemoryDep,
  kExecutionDep,
  kSynchronization,
  kInstructionFetch,
  kPipelineBusy,
  kNotSelected,
  kIdle,
  kOther,
};

inline constexpr int kCommonStallClassCount = 8;

const char* to_string(CommonStallClass cls);
std::optional<CommonStallClass> common_stall_class_from_string(std::string_view s);

// Canonical category names for a vendor, in table order.
const std::vector<std::string>& vendor_categories(Dialect vendor);

// Case-insensitive; '_' and '-' are treated as spaces and Intel's CamelCase
// names ("SbidStall") are accepted. Throws InputError for unknown names.
CommonStallClass map_stall(Dialect vendor, std::string_view category);

// Canonical spelling of `category`, or nullopt when unknown.
std::optional<std::string> canonical_category(Dialect vendor, std::string_view category);

struct InstructionSamples {
  uint64_t offset = 0;
  // Canonical vendor category -> count.
  std::map<std::string, uint64_t> vendor_counts;
  uint64_t latency_samples = 0;
  uint64_t total_samples = 0;
  std::optional<uint64_t> exec_count;
  std::optional<double> efficiency;

  double efficiency_or_default() const { return efficiency.value_or(1.0); }

  bool operator==(const InstructionSamples&) const = default;
};

struct KernelProfile {
  std::string kernel_name;
  Dialect dialect = Dialect::kNvidia;
  uint64_t period_cycles = 1;
  std::vector<InstructionSamples> samples;

  bool operator==(const KernelProfile&) const = default;
};

std::vector<KernelProfile> load_profiles(std::string_view text,
                                         const std::string& source_name = "<profile>");
// Exactly one kernel object expected.
KernelProfile load_profile(std::string_view text, const std::string& source_name = "<profile>");
std::vector<KernelProfile> load_profile_file(const std::string& path);

// Canonical JSON rendering accepted by load_profiles.
std::string format_profiles(const std::vector<KernelProfile>& profiles);

// S_j: latency samples scaled to cycles.
double stall_cycles(const InstructionSamples& s, uint64_t period);

using StallCounts = std::array<uint64_t, kCommonStallClassCount>;

StallCounts common_breakdown(const InstructionSamples& s, Dialect vendor);

// Per-instruction view after attach. Unsampled instructions have zeros.
struct NodeMetrics {
  bool sampled = false;
  uint64_t latency_samples = 0;
  uint64_t total_samples = 0;
  std::optional<uint64_t> exec_count;
  double efficiency = 1.0;
  StallCounts counts{};
  double stall_cycles = 0.0;

  // Fraction of latency samples in `cls`; 0 when there are none.
  double fraction(CommonStallClass cls) const;

  bool operator==(const NodeMetrics&) const = default;
};

struct AnnotatedKernel {
  KernelCfg cfg;
  KernelProfile profile;
  std::vector<NodeMetrics> metrics;  // one per instruction
  Diagnostics skid;                  // sampled offsets with no instruction
};

// Throws InputError on kernel name or dialect mismatch.
AnnotatedKernel attach(KernelCfg cfg, const KernelProfile& prof);

// Profile-less annotation: every instruction unsampled.
AnnotatedKernel attach_empty(KernelCfg cfg);

}  // namespace stallslice
