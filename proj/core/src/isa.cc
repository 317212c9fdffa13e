// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#include "stallslice/isa.h"

#include <array>
#include <string>

#include "stallslice/error.h"

namespace stallslice {

SyntaxError::SyntaxError(std::string file, int line, int column, std::string token,
                         const std::string& what)
    : InputError(file + ":" + std::to_string(line) + ":" + std::to_string(column) +
                 ": " + what + (token.empty() ? "" : " (at '" + token + "')")),
      line_(line),
      column_(column),
      token_(std::move(token)) {}

namespace {

constexpr std::array<const char*, 8> kDiagnosticNames = {
    "skid",          "unresolved_use",          "unreachable_block",      "waitcnt_underflow",
    "missing_barrier_setter", "missing_sbid_setter", "scan_cap", "path_cap",
};

constexpr std::array<const char*, kOpcodeClassCount> kOpcodeClassNames = {
    "global_load", "global_store", "local_load", "local_store", "scalar_load", "constant_load",
    "atomic",      "fp_arith",     "int_arith",  "conversion",  "control_flow", "sync_wait",
    "barrier_all", "send",         "nop",        "other",
};

}  // namespace

const char* to_string(DiagnosticKind kind) { return kDiagnosticNames[static_cast<size_t>(kind)]; }

std::optional<DiagnosticKind> diagnostic_kind_from_string(const std::string& s) {
  for (size_t i = 0; i < kDiagnosticNames.size(); ++i) {
    if (s == kDiagnosticNames[i]) return static_cast<DiagnosticKind>(i);
  }
  return std::nullopt;
}

const char* to_string(Dialect dialect) {
  switch (dialect) {
    case Dialect::kNvidia: return "nvidia";
    case Dialect::kAmd: return "amd";
    case Dialect::kIntel: return "intel";
  }
  return "?";
}

std::optional<Dialect> dialect_from_string(std::string_view s) {
  if (s == "nvidia") return Dialect::kNvidia;
  if (s == "amd") return Dialect::kAmd;
  if (s == "intel") return Dialect::kIntel;
  return std::nullopt;
}

const char* to_string(RegClass cls) {
  switch (cls) {
    case RegClass::kVectorGpr: return "vector_gpr";
    case RegClass::kScalarGpr: return "scalar_gpr";
    case RegClass::kPredicate: return "predicate";
    case RegClass::kBarrier: return "barrier";
    case RegClass::kUniform: return "uniform";
    case RegClass::kSbidToken: return "sbid_token";
    case RegClass::kSpecial: return "special";
  }
  return "?";
}

bool registers_overlap(const RegisterRef& a, const RegisterRef& b) {
  return a.cls == b.cls && a.index < b.end() && b.index < a.end();
}

namespace {

std::string ranged(const char* prefix, const RegisterRef& reg) {
  if (reg.span == 1) return prefix + std::to_string(reg.index);
  return std::string(prefix) + "[" + std::to_string(reg.index) + ":" +
         std::to_string(reg.end() - 1) + "]";
}

std::string paired(const char* prefix, const RegisterRef& reg) {
  std::string out = prefix + std::to_string(reg.index);
  if (reg.span > 1) out += ":+" + std::to_string(reg.span - 1);
  return out;
}

struct AmdSpecial {
  const char* name;
  uint32_t index;
  uint32_t span;
};

constexpr std::array<AmdSpecial, 8> kAmdSpecials = {{
    {"vcc", 0, 2},
    {"vcc_lo", 0, 1},
    {"vcc_hi", 1, 1},
    {"exec", 2, 2},
    {"exec_lo", 2, 1},
    {"exec_hi", 3, 1},
    {"scc", 4, 1},
    {"m0", 5, 1},
}};

}  // namespace

std::string format_register(const RegisterRef& reg, Dialect dialect) {
  switch (dialect) {
    case Dialect::kNvidia:
      switch (reg.cls) {
        case RegClass::kVectorGpr: return paired("R", reg);
        case RegClass::kPredicate: return paired("P", reg);
        case RegClass::kUniform: return paired("UR", reg);
        case RegClass::kBarrier: return paired("B", reg);
        default: break;
      }
      break;
    case Dialect::kAmd:
      switch (reg.cls) {
        case RegClass::kVectorGpr: return ranged("v", reg);
        case RegClass::kScalarGpr: return ranged("s", reg);
        case RegClass::kSpecial:
          for (const auto& sp : kAmdSpecials) {
            if (sp.index == reg.index && sp.span == reg.span) return sp.name;
          }
          break;
        default: break;
      }
      break;
    case Dialect::kIntel:
      switch (reg.cls) {
        case RegClass::kVectorGpr: return paired("r", reg);
        case RegClass::kPredicate:
          return "f" + std::to_string(reg.index / 2) + "." + std::to_string(reg.index % 2);
        default: break;
      }
      break;
  }
  return std::string(to_string(reg.cls)) + ":" + std::to_string(reg.index) +
         (reg.span > 1 ? "+" + std::to_string(reg.span - 1) : "");
}

const char* to_string(OpcodeClass cls) { return kOpcodeClassNames[static_cast<size_t>(cls)]; }

std::optional<OpcodeClass> opcode_class_from_string(std::string_view s) {
  for (size_t i = 0; i < kOpcodeClassNames.size(); ++i) {
    if (s == kOpcodeClassNames[i]) return static_cast<OpcodeClass>(i);
  }
  return std::nullopt;
}

bool is_load_like(OpcodeClass cls) {
  switch (cls) {
    case OpcodeClass::kGlobalLoad:
    case OpcodeClass::kLocalLoad:
    case OpcodeClass::kScalarLoad:
    case OpcodeClass::kConstantLoad:
    case OpcodeClass::kAtomic:
    case OpcodeClass::kSend:
      return true;
    default:
      return false;
  }
}

bool is_compute(OpcodeClass cls) {
  return cls == OpcodeClass::kFpArith || cls == OpcodeClass::kIntArith ||
         cls == OpcodeClass::kConversion;
}

bool writes_no_register(OpcodeClass cls) {
  switch (cls) {
    case OpcodeClass::kGlobalStore:
    case OpcodeClass::kLocalStore:
    case OpcodeClass::kControlFlow:
    case OpcodeClass::kSyncWait:
    case OpcodeClass::kBarrierAll:
    case OpcodeClass::kNop:
      return true;
    default:
      return false;
  }
}

Dialect dialect_of(const SyncInfo& sync) {
  if (std::holds_alternative<WaitcntSync>(sync)) return Dialect::kAmd;
  if (std::holds_alternative<BarrierSync>(sync)) return Dialect::kNvidia;
  return Dialect::kIntel;
}

std::string format_location(const SourceLocation& loc) {
  std::string out = loc.file + ":" + std::to_string(loc.line);
  for (const auto& frame : loc.inline_stack) {
    out += " <- " + frame.file + ":" + std::to_string(frame.line);
  }
  return out;
}

const WaitcntSync* Instruction::waitcnt() const {
  return sync ? std::get_if<WaitcntSync>(&*sync) : nullptr;
}

const BarrierSync* Instruction::barrier() const {
  return sync ? std::get_if<BarrierSync>(&*sync) : nullptr;
}

const SwsbSync* Instruction::swsb() const {
  return sync ? std::get_if<SwsbSync>(&*sync) : nullptr;
}

}  // namespace stallslice
