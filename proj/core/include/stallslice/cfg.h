// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stallslice/disasm.h"
#include "stallslice/error.h"
#include "stallslice/isa.h"

namespace stallslice {

struct BasicBlock {
  uint32_t id = 0;
  size_t first_index = 0;  // inclusive
  size_t last_index = 0;   // inclusive
  std::vector<uint32_t> succs;
  std::vector<uint32_t> preds;

  size_t size() const { return last_index - first_index + 1; }

  bool operator==(const BasicBlock&) const = default;
};

struct KernelCfg {
  std::string kernel_name;
  Dialect dialect = Dialect::kNvidia;
  std::vector<Instruction> instructions;
  std::vector<BasicBlock> blocks;
  uint32_t entry = 0;
  std::map<std::string, size_t> labels;
  // Per block: reachable from entry. Unreachable blocks stay in the graph.
  std::vector<bool> reachable;
  // Per instruction: owning block id.
  std::vector<uint32_t> block_of;

  const BasicBlock& block_containing(size_t index) const { return blocks[block_of[index]]; }
  // Lookup by byte offset; returns instructions.size() when absent.
  size_t index_of_offset(uint64_t offset) const;
  Diagnostics unreachable_diagnostics() const;
};

// Leaders: instruction 0, every branch target, and every instruction that
// follows a control_flow instruction. Throws InputError for branches to
// unknown labels. An empty instruction list yields a CFG with no blocks.
KernelCfg build_cfg(const ParsedKernel& kernel);
KernelCfg build_cfg(const std::string& kernel_name, Dialect dialect,
                    std::vector<Instruction> instrs,
                    const std::map<std::string, size_t>& labels = {});

}  // namespace stallslice
