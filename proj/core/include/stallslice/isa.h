// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// Vendor-neutral instruction model shared by every analysis stage.

#pragma once

#include <bitset>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace stallslice {

enum class Dialect { kNvidia, kAmd, kIntel };

const char* to_string(Dialect dialect);
std::optional<Dialect> dialect_from_string(std::string_view s);

enum class RegClass {
  kVectorGpr,
  kScalarGpr,
  kPredicate,
  kBarrier,
  kUniform,
  kSbidToken,
  kSpecial,
};

const char* to_string(RegClass cls);

// A run of `span` consecutive architectural registers of one class.
// 64-bit operands (NVIDIA R4 pairs, AMD v[2:3]) have span 2.
struct RegisterRef {
  RegClass cls = RegClass::kVectorGpr;
  uint32_t index = 0;
  uint32_t span = 1;

  uint32_t end() const { return index + span; }

  friend auto operator<=>(const RegisterRef&, const RegisterRef&) = default;
};

bool registers_overlap(const RegisterRef& a, const RegisterRef& b);

// Dialect-flavoured spelling, e.g. "R4:+1", "v[2:3]", "f0.1", "vcc".
std::string format_register(const RegisterRef& reg, Dialect dialect);

enum class OpcodeClass {
  kGlobalLoad,
  kGlobalStore,
  kLocalLoad,
  kLocalStore,
  kScalarLoad,
  kConstantLoad,
  kAtomic,
  kFpArith,
  kIntArith,
  kConversion,
  kControlFlow,
  kSyncWait,
  kBarrierAll,
  kSend,
  kNop,
  kOther,
};

inline constexpr int kOpcodeClassCount = 16;

const char* to_string(OpcodeClass cls);
std::optional<OpcodeClass> opcode_class_from_string(std::string_view s);

bool is_load_like(OpcodeClass cls);     // producers that yield memory-class edges
bool is_compute(OpcodeClass cls);       // fp/int arithmetic and conversions
bool writes_no_register(OpcodeClass cls);

// How a control_flow instruction shapes the CFG.
enum class ControlKind {
  kNone,       // not a control transfer
  kBranch,     // unconditional jump to a label
  kCondBranch, // jump to a label or fall through
  kReturn,     // ends the kernel (no successors)
  kCondReturn, // guarded exit: falls through when not taken
  kCall,       // opaque device call, falls through
  kFallThrough // ends a block but continues with the next instruction
};

// NVIDIA barrier indices live in bits 1..6.
using BarrierMask = std::bitset<8>;
// Intel SBID tokens 0..31.
using TokenMask = std::bitset<32>;

inline constexpr uint32_t kMinBarrier = 1;
inline constexpr uint32_t kMaxBarrier = 6;
inline constexpr uint32_t kMaxSbid = 31;

struct WaitcntSync {
  std::optional<uint32_t> vmcnt;
  std::optional<uint32_t> lgkmcnt;

  bool operator==(const WaitcntSync&) const = default;
};

struct BarrierSync {
  BarrierMask write_set;
  BarrierMask read_set;
  BarrierMask wait_mask;
  BarrierMask depbar;
  std::optional<uint32_t> stall;

  // Barriers this instruction blocks on, from the wait field or a DEPBAR list.
  BarrierMask waited() const { return wait_mask | depbar; }
  BarrierMask set_any() const { return write_set | read_set; }
  uint32_t issue_stall_cycles() const { return stall.value_or(1); }

  bool operator==(const BarrierSync&) const = default;
};

struct SwsbSync {
  std::optional<uint32_t> set_token;
  TokenMask wait_dst;
  TokenMask wait_src;

  TokenMask waited() const { return wait_dst | wait_src; }

  bool operator==(const SwsbSync&) const = default;
};

using SyncInfo = std::variant<WaitcntSync, BarrierSync, SwsbSync>;

Dialect dialect_of(const SyncInfo& sync);

struct SourceFrame {
  std::string file;
  uint32_t line = 0;

  bool operator==(const SourceFrame&) const = default;
};

// Innermost location first; `inline_stack` lists the enclosing call sites.
struct SourceLocation {
  std::string file;
  uint32_t line = 0;
  std::vector<SourceFrame> inline_stack;

  bool operator==(const SourceLocation&) const = default;
};

std::string format_location(const SourceLocation& loc);

struct Guard {
  RegisterRef reg{RegClass::kPredicate, 0, 1};
  bool negated = false;

  bool operator==(const Guard&) const = default;
};

// An operand as written in the listing. Register operands carry the
// registers they name; memory operands carry their address registers.
struct Operand {
  enum class Kind { kRegister, kMemory, kImmediate, kLabel, kLiteral };

  Kind kind = Kind::kLiteral;
  std::string text;
  std::vector<RegisterRef> regs;

  bool operator==(const Operand&) const = default;
};

struct Instruction {
  uint64_t offset = 0;
  Dialect dialect = Dialect::kNvidia;
  std::string mnemonic;
  OpcodeClass opcode_class = OpcodeClass::kOther;
  ControlKind control = ControlKind::kNone;
  std::vector<RegisterRef> dests;
  std::vector<RegisterRef> srcs;
  // Subset of srcs that form a memory address.
  std::vector<RegisterRef> address_srcs;
  std::optional<Guard> guard;
  std::optional<SyncInfo> sync;
  std::optional<SourceLocation> src_loc;
  std::optional<std::string> target;
  std::vector<Operand> operands;

  const WaitcntSync* waitcnt() const;
  const BarrierSync* barrier() const;
  const SwsbSync* swsb() const;

  bool operator==(const Instruction&) const = default;
};

}  // namespace stallslice
