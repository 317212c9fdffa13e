// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#include "stallslice/opcode_table.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "builtin_tables.h"
#include "stallslice/error.h"

namespace stallslice {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

// Mnemonic up to the first '.', lower-cased ("BRA.U" -> "bra").
std::string base_mnemonic(std::string_view mnemonic) {
  return lower(mnemonic.substr(0, mnemonic.find('.')));
}

}  // namespace

OpcodeTable OpcodeTable::parse(std::string_view text, const std::string& source_name) {
  OpcodeTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string pattern, cls_name, extra;
    if (!(fields >> pattern)) continue;
    if (!(fields >> cls_name) || (fields >> extra)) {
      throw InputError(source_name + ":" + std::to_string(line_no) +
                       ": expected '<pattern> <class>'");
    }
    auto cls = opcode_class_from_string(cls_name);
    if (!cls) {
      throw InputError(source_name + ":" + std::to_string(line_no) + ": unknown opcode class '" +
                       cls_name + "'");
    }
    pattern = lower(pattern);
    auto existing = std::find_if(table.rules_.begin(), table.rules_.end(),
                                 [&](const auto& r) { return r.first == pattern; });
    if (existing != table.rules_.end()) {
      existing->second = *cls;  // later lines override earlier ones
    } else {
      table.rules_.emplace_back(pattern, *cls);
    }
  }
  std::sort(table.rules_.begin(), table.rules_.end(), [](const auto& a, const auto& b) {
    if (a.first.size() != b.first.size()) return a.first.size() > b.first.size();
    return a.first < b.first;
  });
  return table;
}

OpcodeTable OpcodeTable::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open opcode table '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

const OpcodeTable& OpcodeTable::builtin(Dialect dialect) {
  static const OpcodeTable nvidia = parse(builtin_table_text(Dialect::kNvidia), "opcodes_nvidia");
  static const OpcodeTable amd = parse(builtin_table_text(Dialect::kAmd), "opcodes_amd");
  static const OpcodeTable intel = parse(builtin_table_text(Dialect::kIntel), "opcodes_intel");
  switch (dialect) {
    case Dialect::kNvidia: return nvidia;
    case Dialect::kAmd: return amd;
    case Dialect::kIntel: return intel;
  }
  return nvidia;
}

OpcodeClass OpcodeTable::classify(std::string_view mnemonic) const {
  const std::string key = lower(mnemonic);
  for (const auto& [pattern, cls] : rules_) {
    if (starts_with(key, pattern)) return cls;
  }
  return OpcodeClass::kOther;
}

OpcodeClass classify_opcode(Dialect dialect, std::string_view mnemonic) {
  return OpcodeTable::builtin(dialect).classify(mnemonic);
}

std::string_view builtin_table_text(Dialect dialect) {
  switch (dialect) {
    case Dialect::kNvidia: return detail::kOpcodesNvidia;
    case Dialect::kAmd: return detail::kOpcodesAmd;
    case Dialect::kIntel: return detail::kOpcodesIntel;
  }
  return {};
}

ControlKind control_kind(Dialect dialect, std::string_view mnemonic, bool guarded) {
  const std::string base = base_mnemonic(mnemonic);
  const std::string full = lower(mnemonic);
  const ControlKind jump = guarded ? ControlKind::kCondBranch : ControlKind::kBranch;
  const ControlKind exit = guarded ? ControlKind::kCondReturn : ControlKind::kReturn;
  switch (dialect) {
    case Dialect::kNvidia:
      if (base == "bra" || base == "jmp") return jump;
      if (base == "exit" || base == "ret" || base == "kill" || base == "brx" || base == "jmx")
        return exit;
      if (base == "call") return ControlKind::kCall;
      return ControlKind::kFallThrough;
    case Dialect::kAmd:
      if (starts_with(full, "s_cbranch")) return ControlKind::kCondBranch;
      if (starts_with(full, "s_branch")) return ControlKind::kBranch;
      if (starts_with(full, "s_endpgm") || starts_with(full, "s_setpc")) return ControlKind::kReturn;
      if (starts_with(full, "s_swappc")) return ControlKind::kCall;
      return ControlKind::kFallThrough;
    case Dialect::kIntel:
      if (base == "if" || base == "while" || base == "break" || base == "cont" || base == "brc")
        return ControlKind::kCondBranch;
      if (base == "jmpi" || base == "goto" || base == "brd" || base == "else") return jump;
      if (base == "ret" || base == "halt") return exit;
      if (base == "call" || base == "calla") return ControlKind::kCall;
      return ControlKind::kFallThrough;
  }
  return ControlKind::kFallThrough;
}

}  // namespace stallslice
