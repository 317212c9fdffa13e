// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stallslice/isa.h"

namespace stallslice {

// Mnemonic-prefix table. Text format, one rule per line:
//
//   # comment
//   <pattern> <class>
//
// Patterns are matched case-insensitively as prefixes of the mnemonic; the
// longest matching pattern wins. Unmatched mnemonics classify as `other`.
class OpcodeTable {
 public:
  OpcodeTable() = default;

  static OpcodeTable parse(std::string_view text, const std::string& source_name);
  static OpcodeTable load_file(const std::string& path);
  static const OpcodeTable& builtin(Dialect dialect);

  OpcodeClass classify(std::string_view mnemonic) const;
  size_t size() const { return rules_.size(); }

 private:
  // Sorted by descending pattern length, then pattern text.
  std::vector<std::pair<std::string, OpcodeClass>> rules_;
};

// Classification against the bundled table for `dialect`.
OpcodeClass classify_opcode(Dialect dialect, std::string_view mnemonic);

// CFG role of a control_flow mnemonic. `guarded` is true when the
// instruction carries a guard predicate.
ControlKind control_kind(Dialect dialect, std::string_view mnemonic, bool guarded);

// Raw text of the bundled table (as shipped in core/data).
std::string_view builtin_table_text(Dialect dialect);

}  // namespace stallslice
