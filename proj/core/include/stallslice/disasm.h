// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// Parser for the simplified disassembly dialects. One instruction per line:
//
//   [/*HEXOFF*/] [@[!]Pn] MNEMONIC [operands...] [{sync-annotations}] [// file:line[ <- file:line ...]]
//
// Kernel sections start with `.kernel <name>`; labels are `<ident>:` on their
// own line. Full-line `//` and `#` comments and blank lines are ignored.
// When an offset is omitted it continues from the previous instruction with
// the dialect's default stride (16 bytes for NVIDIA and Intel, 4 for AMD).
//
// NVIDIA: registers Rn (pair: `Rn:+1`, or implied by 64-bit mnemonics such as
//   DFMA and `.64` suffixes), URn, Pn, memory `[Rn(.64)(+imm)]`; annotations
//   `wait=Bi[,Bj] read=Bi write=Bi stall=N depbar=Bi`.
// AMD: vN, v[a:b], sN, s[a:b], vcc/exec/scc/m0; waits are written as
//   `s_waitcnt vmcnt(N) lgkmcnt(N)`.
// Intel: rN, flag registers fN.M (usable as guards: `@f0.0`); annotations
//   `sbid.set=T sbid.wait.dst=T[,T] sbid.wait.src=T[,T]`.

#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "stallslice/isa.h"
#include "stallslice/opcode_table.h"

namespace stallslice {

struct ParsedKernel {
  std::string name;
  Dialect dialect = Dialect::kNvidia;
  std::vector<Instruction> instructions;
  // Label -> index of the instruction that follows it. A trailing label maps
  // to instructions.size().
  std::map<std::string, size_t> labels;

  bool operator==(const ParsedKernel&) const = default;
};

struct ParseOptions {
  // Overrides the bundled opcode table when set.
  const OpcodeTable* opcode_table = nullptr;
  std::string source_name = "<listing>";
};

// Throws SyntaxError on malformed input, duplicate or decreasing offsets and
// out-of-range barrier/SBID indices.
std::vector<ParsedKernel> parse_listing(Dialect dialect, std::string_view text,
                                        const ParseOptions& options = {});

// Canonical single-line rendering; parse(format(x)) reproduces x.
std::string format_instruction(const Instruction& inst);
std::string format_listing(const std::vector<ParsedKernel>& kernels);

}  // namespace stallslice
