// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#include "stallslice/cfg.h"

#include <algorithm>
#include <set>

#include "stallslice/opcode_table.h"

namespace stallslice {

size_t KernelCfg::index_of_offset(uint64_t offset) const {
  auto it = std::lower_bound(instructions.begin(), instructions.end(), offset,
                             [](const Instruction& inst, uint64_t off) { return inst.offset < off; });
  if (it == instructions.end() || it->offset != offset) return instructions.size();
  return static_cast<size_t>(it - instructions.begin());
}

Diagnostics KernelCfg::unreachable_diagnostics() const {
  Diagnostics out;
  for (const auto& block : blocks) {
    if (reachable[block.id]) continue;
    const uint64_t off = instructions[block.first_index].offset;
    out.push_back({DiagnosticKind::kUnreachableBlock, off,
                   "block " + std::to_string(block.id) + " (" + std::to_string(block.size()) +
                       " instructions) is unreachable from the entry"});
  }
  return out;
}

KernelCfg build_cfg(const ParsedKernel& kernel) {
  return build_cfg(kernel.name, kernel.dialect, kernel.instructions, kernel.labels);
}

KernelCfg build_cfg(const std::string& kernel_name, Dialect dialect, std::vector<Instruction> instrs,
                    const std::map<std::string, size_t>& labels) {
  KernelCfg cfg;
  cfg.kernel_name = kernel_name;
  cfg.dialect = dialect;
  cfg.instructions = std::move(instrs);
  cfg.labels = labels;
  const size_t n = cfg.instructions.size();
  if (n == 0) return cfg;

  for (size_t i = 1; i < n; ++i) {
    if (cfg.instructions[i].offset <= cfg.instructions[i - 1].offset)
      throw InputError("kernel '" + kernel_name + "': instruction offsets must strictly increase");
  }

  for (auto& inst : cfg.instructions) {
    if (inst.opcode_class == OpcodeClass::kControlFlow && inst.control == ControlKind::kNone)
      inst.control = control_kind(dialect, inst.mnemonic, inst.guard.has_value());
  }

  auto target_index = [&](const Instruction& inst) -> size_t {
    if (!inst.target)
      throw InputError("kernel '" + kernel_name + "': branch at offset " +
                       std::to_string(inst.offset) + " has no target label");
    auto it = cfg.labels.find(*inst.target);
    if (it == cfg.labels.end())
      throw InputError("kernel '" + kernel_name + "': branch to unknown label '" + *inst.target + "'");
    if (it->second >= n)
      throw InputError("kernel '" + kernel_name + "': label '" + *inst.target +
                       "' does not precede an instruction");
    return it->second;
  };
  auto is_jump = [](const Instruction& inst) {
    return inst.control == ControlKind::kBranch || inst.control == ControlKind::kCondBranch;
  };

  std::set<size_t> leaders{0};
  for (size_t i = 0; i < n; ++i) {
    const Instruction& inst = cfg.instructions[i];
    if (inst.opcode_class != OpcodeClass::kControlFlow) continue;
    if (i + 1 < n) leaders.insert(i + 1);
    if (is_jump(inst)) leaders.insert(target_index(inst));
  }

  cfg.block_of.assign(n, 0);
  for (auto it = leaders.begin(); it != leaders.end(); ++it) {
    auto next = std::next(it);
    BasicBlock block;
    block.id = static_cast<uint32_t>(cfg.blocks.size());
    block.first_index = *it;
    block.last_index = (next == leaders.end() ? n : *next) - 1;
    for (size_t i = block.first_index; i <= block.last_index; ++i) cfg.block_of[i] = block.id;
    cfg.blocks.push_back(std::move(block));
  }

  auto add_edge = [&](uint32_t from, uint32_t to) {
    auto& succs = cfg.blocks[from].succs;
    if (std::find(succs.begin(), succs.end(), to) != succs.end()) return;
    succs.push_back(to);
    cfg.blocks[to].preds.push_back(from);
  };

  for (auto& block : cfg.blocks) {
    const Instruction& last = cfg.instructions[block.last_index];
    const bool has_next = block.last_index + 1 < n;
    const uint32_t next_block = has_next ? cfg.block_of[block.last_index + 1] : 0;
    ControlKind kind = last.opcode_class == OpcodeClass::kControlFlow ? last.control : ControlKind::kNone;
    switch (kind) {
      case ControlKind::kBranch:
        add_edge(block.id, cfg.block_of[target_index(last)]);
        break;
      case ControlKind::kCondBranch:
        add_edge(block.id, cfg.block_of[target_index(last)]);
        if (has_next) add_edge(block.id, next_block);
        break;
      case ControlKind::kReturn:
        break;
      default:
        if (has_next) add_edge(block.id, next_block);
        break;
    }
  }

  cfg.entry = 0;
  cfg.reachable.assign(cfg.blocks.size(), false);
  std::vector<uint32_t> stack{cfg.entry};
  cfg.reachable[cfg.entry] = true;
  while (!stack.empty()) {
    uint32_t b = stack.back();
    stack.pop_back();
    for (uint32_t s : cfg.blocks[b].succs) {
      if (!cfg.reachable[s]) {
        cfg.reachable[s] = true;
        stack.push_back(s);
      }
    }
  }
  return cfg;
}

}  // namespace stallslice
