// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stallslice {

// Malformed or inconsistent user input (listing, profile, config, flags).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Source-positioned input error raised by the listing parser.
class SyntaxError : public InputError {
 public:
  SyntaxError(std::string file, int line, int column, std::string token,
              const std::string& what);

  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& token() const { return token_; }

 private:
  int line_;
  int column_;
  std::string token_;
};

// An internal invariant (e.g. blame conservation) was violated. This is a bug
// in the analysis, not in the input.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class DiagnosticKind {
  kSkid,
  kUnresolvedUse,
  kUnreachableBlock,
  kWaitcntUnderflow,
  kMissingBarrierSetter,
  kMissingSbidSetter,
  kScanCap,
  kPathCap,
};

const char* to_string(DiagnosticKind kind);
std::optional<DiagnosticKind> diagnostic_kind_from_string(const std::string& s);

// Non-fatal notice carried through the pipeline into the report.
struct Diagnostic {
  DiagnosticKind kind;
  std::optional<uint64_t> offset;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

using Diagnostics = std::vector<Diagnostic>;

}  // namespace stallslice
