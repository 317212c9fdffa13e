// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#include "stallslice/dataflow.h"

#include <algorithm>
#include <cstdio>
#include <optional>
#include <set>

namespace stallslice {

namespace {

class Bits {
 public:
  explicit Bits(size_t n = 0) : words_((n + 63) / 64, 0) {}

  void set(size_t i) { words_[i / 64] |= uint64_t{1} << (i % 64); }
  bool test(size_t i) const { return (words_[i / 64] >> (i % 64)) & 1; }

  bool operator==(const Bits&) const = default;

  void or_with(const Bits& o) {
    for (size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
  }
  // this = gen | (in & ~kill)
  void transfer(const Bits& gen, const Bits& in, const Bits& kill) {
    for (size_t i = 0; i < words_.size(); ++i) words_[i] = gen.words_[i] | (in.words_[i] & ~kill.words_[i]);
  }
  template <typename F>
  void for_each(F&& f) const {
    for (size_t w = 0; w < words_.size(); ++w) {
      uint64_t bits = words_[w];
      while (bits) {
        const int b = __builtin_ctzll(bits);
        f(w * 64 + static_cast<size_t>(b));
        bits &= bits - 1;
      }
    }
  }

 private:
  std::vector<uint64_t> words_;
};

// Dense numbering of every unit mentioned by the kernel.
struct UnitIndex {
  std::map<RegUnit, size_t> ids;
  std::vector<RegUnit> units;

  size_t id(const RegUnit& u) {
    auto [it, inserted] = ids.emplace(u, units.size());
    if (inserted) units.push_back(u);
    return it->second;
  }
  std::optional<size_t> find(const RegUnit& u) const {
    auto it = ids.find(u);
    if (it == ids.end()) return std::nullopt;
    return it->second;
  }
};

UnitIndex index_units(const KernelCfg& cfg) {
  UnitIndex index;
  for (const auto& inst : cfg.instructions) {
    for (const auto& r : inst.dests)
      for (const auto& u : units_of(r)) index.id(u);
    for (const auto& r : inst.srcs)
      for (const auto& u : units_of(r)) index.id(u);
    if (inst.guard)
      for (const auto& u : units_of(inst.guard->reg)) index.id(u);
  }
  return index;
}

// Blocks in reverse post-order from the entry, then any unreachable ones.
std::vector<uint32_t> block_order(const KernelCfg& cfg) {
  const size_t n = cfg.blocks.size();
  std::vector<uint32_t> post;
  std::vector<char> seen(n, 0);
  for (uint32_t root = 0; root < n; ++root) {
    const uint32_t start = root == 0 ? cfg.entry : root;
    if (seen[start]) continue;
    std::vector<std::pair<uint32_t, size_t>> stack{{start, 0}};
    seen[start] = 1;
    while (!stack.empty()) {
      auto& [b, next] = stack.back();
      if (next < cfg.blocks[b].succs.size()) {
        const uint32_t s = cfg.blocks[b].succs[next++];
        if (!seen[s]) {
          seen[s] = 1;
          stack.push_back({s, 0});
        }
      } else {
        post.push_back(b);
        stack.pop_back();
      }
    }
  }
  std::reverse(post.begin(), post.end());
  return post;
}

std::string hex_offset(uint64_t offset) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%04llx", static_cast<unsigned long long>(offset));
  return buf;
}

}  // namespace

std::vector<RegUnit> units_of(const RegisterRef& reg) {
  std::vector<RegUnit> out;
  out.reserve(reg.span);
  for (uint32_t i = 0; i < reg.span; ++i) out.push_back({reg.cls, reg.index + i});
  return out;
}

const std::vector<size_t>& ReachingDefinitions::at(uint32_t block, const RegUnit& unit) const {
  static const std::vector<size_t> kEmpty;
  const auto& m = entry[block];
  auto it = m.find(unit);
  return it == m.end() ? kEmpty : it->second;
}

ReachingDefinitions reaching_definitions(const KernelCfg& cfg) {
  ReachingDefinitions out;
  const size_t nblocks = cfg.blocks.size();
  out.entry.resize(nblocks);
  if (nblocks == 0) return out;

  UnitIndex units = index_units(cfg);
  // Definition sites: (instruction, unit).
  std::vector<std::pair<size_t, size_t>> sites;
  std::vector<std::vector<size_t>> sites_of_unit(units.units.size());
  std::vector<std::vector<std::pair<size_t, size_t>>> sites_of_inst(cfg.instructions.size());
  for (size_t i = 0; i < cfg.instructions.size(); ++i) {
    std::set<size_t> seen;
    for (const auto& r : cfg.instructions[i].dests) {
      for (const auto& u : units_of(r)) {
        const size_t uid = units.id(u);
        if (!seen.insert(uid).second) continue;
        sites_of_unit[uid].push_back(sites.size());
        sites_of_inst[i].push_back({uid, sites.size()});
        sites.push_back({i, uid});
      }
    }
  }

  const size_t nsites = sites.size();
  std::vector<Bits> gen(nblocks, Bits(nsites)), kill(nblocks, Bits(nsites));
  for (const auto& block : cfg.blocks) {
    std::map<size_t, size_t> last_def;  // unit -> site
    for (size_t i = block.first_index; i <= block.last_index; ++i) {
      for (const auto& [uid, site] : sites_of_inst[i]) last_def[uid] = site;
    }
    for (const auto& [uid, site] : last_def) {
      gen[block.id].set(site);
      for (size_t s : sites_of_unit[uid]) kill[block.id].set(s);
    }
  }

  std::vector<Bits> in(nblocks, Bits(nsites)), out_bits = gen;
  const auto order = block_order(cfg);
  bool changed = true;
  while (changed) {
    changed = false;
    for (uint32_t b : order) {
      Bits next_in(nsites);
      for (uint32_t p : cfg.blocks[b].preds) next_in.or_with(out_bits[p]);
      Bits next_out(nsites);
      next_out.transfer(gen[b], next_in, kill[b]);
      in[b] = std::move(next_in);
      if (!(next_out == out_bits[b])) {
        out_bits[b] = std::move(next_out);
        changed = true;
      }
    }
  }

  for (uint32_t b = 0; b < nblocks; ++b) {
    auto& m = out.entry[b];
    in[b].for_each([&](size_t site) {
      const auto& [inst, uid] = sites[site];
      m[units.units[uid]].push_back(inst);
    });
    for (auto& [unit, defs] : m) {
      std::sort(defs.begin(), defs.end());
      defs.erase(std::unique(defs.begin(), defs.end()), defs.end());
    }
  }
  return out;
}

LinkResult per_use_link(const KernelCfg& cfg, const ReachingDefinitions& reach_in) {
  std::set<UseDefTriple> triples;
  std::set<std::pair<size_t, RegisterRef>> unresolved;
  LinkResult result;

  for (const auto& block : cfg.blocks) {
    std::map<RegUnit, std::vector<size_t>> curr = reach_in.entry[block.id];
    auto link = [&](size_t i, const RegisterRef& reg, LinkKind kind) {
      bool any = false;
      for (const auto& u : units_of(reg)) {
        auto it = curr.find(u);
        if (it == curr.end()) continue;
        for (size_t d : it->second) {
          triples.insert({i, reg, d, kind});
          any = true;
        }
      }
      if (!any && unresolved.insert({i, reg}).second) {
        const Instruction& inst = cfg.instructions[i];
        result.unresolved.push_back(
            {DiagnosticKind::kUnresolvedUse, inst.offset,
             format_register(reg, cfg.dialect) + " read by " + inst.mnemonic + " at " +
                 hex_offset(inst.offset) + " has no reaching definition"});
      }
    };
    for (size_t i = block.first_index; i <= block.last_index; ++i) {
      const Instruction& inst = cfg.instructions[i];
      for (const auto& r : inst.srcs) link(i, r, LinkKind::kRaw);
      if (inst.guard) link(i, inst.guard->reg, LinkKind::kGuard);
      for (const auto& r : inst.dests) {
        for (const auto& u : units_of(r)) curr[u] = {i};
      }
    }
  }
  result.triples.assign(triples.begin(), triples.end());
  return result;
}

bool Liveness::live_out_of(uint32_t block, const RegUnit& unit) const {
  const auto& v = live_out[block];
  return std::binary_search(v.begin(), v.end(), unit);
}

Liveness compute_liveness(const KernelCfg& cfg) {
  const size_t nblocks = cfg.blocks.size();
  UnitIndex units = index_units(cfg);
  const size_t nunits = units.units.size();
  std::vector<Bits> use(nblocks, Bits(nunits)), def(nblocks, Bits(nunits));
  for (const auto& block : cfg.blocks) {
    for (size_t i = block.first_index; i <= block.last_index; ++i) {
      const Instruction& inst = cfg.instructions[i];
      auto read = [&](const RegisterRef& r) {
        for (const auto& u : units_of(r)) {
          const size_t uid = *units.find(u);
          if (!def[block.id].test(uid)) use[block.id].set(uid);
        }
      };
      for (const auto& r : inst.srcs) read(r);
      if (inst.guard) read(inst.guard->reg);
      for (const auto& r : inst.dests)
        for (const auto& u : units_of(r)) def[block.id].set(*units.find(u));
    }
  }

  std::vector<Bits> in(nblocks, Bits(nunits)), out(nblocks, Bits(nunits));
  auto order = block_order(cfg);
  std::reverse(order.begin(), order.end());
  bool changed = true;
  while (changed) {
    changed = false;
    for (uint32_t b : order) {
      Bits next_out(nunits);
      for (uint32_t s : cfg.blocks[b].succs) next_out.or_with(in[s]);
      Bits next_in(nunits);
      next_in.transfer(use[b], next_out, def[b]);
      out[b] = std::move(next_out);
      if (!(next_in == in[b])) {
        in[b] = std::move(next_in);
        changed = true;
      }
    }
  }

  Liveness result;
  result.live_in.resize(nblocks);
  result.live_out.resize(nblocks);
  for (size_t b = 0; b < nblocks; ++b) {
    in[b].for_each([&](size_t uid) { result.live_in[b].push_back(units.units[uid]); });
    out[b].for_each([&](size_t uid) { result.live_out[b].push_back(units.units[uid]); });
    std::sort(result.live_in[b].begin(), result.live_in[b].end());
    std::sort(result.live_out[b].begin(), result.live_out[b].end());
  }
  return result;
}

std::vector<UseDefTriple> liveness_filter(const KernelCfg& cfg, std::vector<UseDefTriple> triples) {
  const Liveness live = compute_liveness(cfg);
  std::vector<UseDefTriple> out;
  out.reserve(triples.size());
  for (auto& t : triples) {
    const uint32_t def_block = cfg.block_of[t.def];
    if (def_block == cfg.block_of[t.use] && t.def < t.use) {
      out.push_back(std::move(t));
      continue;
    }
    bool keep = false;
    for (const auto& u : units_of(t.reg)) {
      const bool defined = std::any_of(
          cfg.instructions[t.def].dests.begin(), cfg.instructions[t.def].dests.end(),
          [&](const RegisterRef& d) { return registers_overlap(d, RegisterRef{u.cls, u.index, 1}); });
      if (defined && live.live_out_of(def_block, u)) {
        keep = true;
        break;
      }
    }
    if (keep) out.push_back(std::move(t));
  }
  return out;
}

}  // namespace stallslice
