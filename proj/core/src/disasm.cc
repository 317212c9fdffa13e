// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#include "stallslice/disasm.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <optional>
#include <sstream>

#include "stallslice/error.h"

namespace stallslice {

namespace {

struct Token {
  std::string text;
  int column = 0;  // 1-based
};

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '$';
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '$';
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !is_ident_start(s[0])) return false;
  return std::all_of(s.begin(), s.end(), is_ident_char);
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

std::optional<uint64_t> parse_uint(std::string_view s, int base = 10) {
  if (s.empty()) return std::nullopt;
  uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value, base);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

bool is_immediate(std::string_view s) {
  if (auto colon = s.find(':'); colon != std::string_view::npos && colon > 0) {
    s = s.substr(0, colon);  // Intel typed immediates: 0x8:ud
  }
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) s.remove_prefix(1);
  if (s.empty()) return false;
  if (starts_with(s, "0x") || starts_with(s, "0X")) {
    return s.size() > 2 && std::all_of(s.begin() + 2, s.end(), [](char c) {
             return std::isxdigit(static_cast<unsigned char>(c));
           });
  }
  const std::string l = lower(s);
  if (l == "inf" || l == "nan" || l == "qnan") return true;
  if (!std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  char* end = nullptr;
  const std::string copy(s);
  std::strtod(copy.c_str(), &end);
  return end == copy.c_str() + copy.size();
}

// Splits operands on commas and whitespace, keeping bracketed groups intact.
std::vector<Token> split_operands(std::string_view text, int base_column) {
  std::vector<Token> tokens;
  std::string current;
  int start = 0;
  int depth = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '[' || c == '(' || c == '<') ++depth;
    if (c == ']' || c == ')' || c == '>') depth = std::max(0, depth - 1);
    if (depth == 0 && (c == ',' || std::isspace(static_cast<unsigned char>(c)))) {
      if (!current.empty()) tokens.push_back({current, base_column + start});
      current.clear();
      continue;
    }
    if (current.empty()) start = static_cast<int>(i);
    current.push_back(c);
  }
  if (!current.empty()) tokens.push_back({current, base_column + start});
  return tokens;
}

class LineParser {
 public:
  LineParser(Dialect dialect, const OpcodeTable& table, const std::string& source, int line_no)
      : dialect_(dialect), table_(table), source_(source), line_no_(line_no) {}

  [[noreturn]] void fail(int column, const std::string& token, const std::string& what) const {
    throw SyntaxError(source_, line_no_, column, token, what);
  }

  Instruction parse(std::string_view line, std::optional<uint64_t> default_offset,
                    bool* explicit_offset);

 private:
  Operand parse_operand(const Token& tok, bool is_control, size_t position);
  std::optional<RegisterRef> parse_register(std::string_view text, int column);
  Operand parse_nvidia_memory(const Token& tok);
  void parse_annotations(std::string_view body, int column, Instruction& inst);
  void parse_location(std::string_view body, int column, Instruction& inst);
  void decode_waitcnt(const std::vector<Token>& tokens, Instruction& inst);
  void assign_roles(Instruction& inst, const std::vector<Token>& tokens);

  Dialect dialect_;
  const OpcodeTable& table_;
  const std::string& source_;
  int line_no_;
  std::string mnemonic_lower_;
};

std::optional<RegisterRef> LineParser::parse_register(std::string_view text, int column) {
  auto index_of = [&](std::string_view digits) -> std::optional<uint32_t> {
    auto v = parse_uint(digits);
    if (!v || *v > 0xffff) return std::nullopt;
    return static_cast<uint32_t>(*v);
  };
  // Explicit pair syntax shared by NVIDIA and Intel: R4:+1, r10:+1.
  auto split_span = [&](std::string_view& body) -> uint32_t {
    auto pos = body.find(":+");
    if (pos == std::string_view::npos) return 1;
    auto extra = parse_uint(body.substr(pos + 2));
    if (!extra || *extra > 15) fail(column, std::string(text), "bad register span");
    body = body.substr(0, pos);
    return static_cast<uint32_t>(*extra) + 1;
  };

  switch (dialect_) {
    case Dialect::kNvidia: {
      std::string_view body = text;
      const uint32_t span = split_span(body);
      if (auto dot = body.find('.'); dot != std::string_view::npos) body = body.substr(0, dot);
      if (starts_with(body, "UR")) {
        if (auto idx = index_of(body.substr(2))) return RegisterRef{RegClass::kUniform, *idx, span};
        return std::nullopt;
      }
      if (starts_with(body, "R")) {
        if (auto idx = index_of(body.substr(1))) return RegisterRef{RegClass::kVectorGpr, *idx, span};
        return std::nullopt;
      }
      if (starts_with(body, "P")) {
        if (auto idx = index_of(body.substr(1))) {
          if (*idx > 6) fail(column, std::string(text), "predicate index out of range P0-P6");
          return RegisterRef{RegClass::kPredicate, *idx, 1};
        }
        return std::nullopt;
      }
      if (starts_with(body, "B")) {
        if (auto idx = index_of(body.substr(1))) {
          if (*idx < kMinBarrier || *idx > kMaxBarrier)
            fail(column, std::string(text), "barrier index out of range B1-B6");
          return RegisterRef{RegClass::kBarrier, *idx, 1};
        }
        return std::nullopt;
      }
      return std::nullopt;
    }
    case Dialect::kAmd: {
      static const std::pair<const char*, RegisterRef> specials[] = {
          {"vcc", {RegClass::kSpecial, 0, 2}},    {"vcc_lo", {RegClass::kSpecial, 0, 1}},
          {"vcc_hi", {RegClass::kSpecial, 1, 1}}, {"exec", {RegClass::kSpecial, 2, 2}},
          {"exec_lo", {RegClass::kSpecial, 2, 1}}, {"exec_hi", {RegClass::kSpecial, 3, 1}},
          {"scc", {RegClass::kSpecial, 4, 1}},    {"m0", {RegClass::kSpecial, 5, 1}},
      };
      for (const auto& [name, ref] : specials) {
        if (text == name) return ref;
      }
      if (text.size() < 2 || (text[0] != 'v' && text[0] != 's')) return std::nullopt;
      const RegClass cls = text[0] == 'v' ? RegClass::kVectorGpr : RegClass::kScalarGpr;
      std::string_view rest = text.substr(1);
      if (!rest.empty() && rest.front() == '[') {
        if (rest.back() != ']') return std::nullopt;
        rest = rest.substr(1, rest.size() - 2);
        auto colon = rest.find(':');
        if (colon == std::string_view::npos) {
          auto idx = index_of(rest);
          if (!idx) return std::nullopt;
          return RegisterRef{cls, *idx, 1};
        }
        auto lo = index_of(rest.substr(0, colon));
        auto hi = index_of(rest.substr(colon + 1));
        if (!lo || !hi) return std::nullopt;
        if (*hi < *lo) fail(column, std::string(text), "register range is reversed");
        return RegisterRef{cls, *lo, *hi - *lo + 1};
      }
      if (auto idx = index_of(rest)) return RegisterRef{cls, *idx, 1};
      return std::nullopt;
    }
    case Dialect::kIntel: {
      std::string_view body = text;
      if (starts_with(body, "f") && body.size() >= 2 &&
          std::isdigit(static_cast<unsigned char>(body[1]))) {
        auto dot = body.find('.');
        auto major = index_of(body.substr(1, dot == std::string_view::npos ? body.npos : dot - 1));
        uint32_t minor = 0;
        if (dot != std::string_view::npos) {
          auto m = index_of(body.substr(dot + 1));
          if (!m || *m > 1) return std::nullopt;
          minor = *m;
        }
        if (!major) return std::nullopt;
        return RegisterRef{RegClass::kPredicate, *major * 2 + minor, 1};
      }
      if (!starts_with(body, "r") || body.size() < 2 ||
          !std::isdigit(static_cast<unsigned char>(body[1]))) {
        return std::nullopt;
      }
      const uint32_t span = split_span(body);
      // Drop sub-register, region and type decorations: r10.0<8;8,1>:f
      size_t end = 1;
      while (end < body.size() && std::isdigit(static_cast<unsigned char>(body[end]))) ++end;
      std::string_view tail = body.substr(end);
      if (!tail.empty() && tail[0] != '.' && tail[0] != '<' && tail[0] != ':') return std::nullopt;
      if (auto idx = index_of(body.substr(1, end - 1)))
        return RegisterRef{RegClass::kVectorGpr, *idx, span};
      return std::nullopt;
    }
  }
  return std::nullopt;
}

Operand LineParser::parse_nvidia_memory(const Token& tok) {
  Operand op;
  op.kind = Operand::Kind::kMemory;
  op.text = tok.text;
  std::string_view inner(tok.text);
  inner = inner.substr(1, inner.size() - 2);
  size_t pos = 0;
  while (pos <= inner.size()) {
    size_t next = inner.find('+', pos);
    std::string part(inner.substr(pos, next == std::string_view::npos ? inner.npos : next - pos));
    part.erase(std::remove_if(part.begin(), part.end(),
                              [](char c) { return std::isspace(static_cast<unsigned char>(c)); }),
               part.end());
    if (!part.empty() && part != "RZ" && part != "URZ" && !is_immediate(part)) {
      std::string_view base = part;
      uint32_t span = 1;
      if (auto dot = base.find('.'); dot != std::string_view::npos) {
        if (base.substr(dot) == ".64") span = 2;
        base = base.substr(0, dot);
      }
      auto reg = parse_register(base, tok.column);
      if (!reg) fail(tok.column, tok.text, "unrecognized address component '" + part + "'");
      reg->span = std::max(reg->span, span);
      op.regs.push_back(*reg);
    }
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return op;
}

Operand LineParser::parse_operand(const Token& tok, bool is_control, size_t position) {
  (void)position;
  std::string_view text = tok.text;
  Operand op;
  op.text = tok.text;

  if (dialect_ == Dialect::kNvidia && text.size() >= 2 && text.front() == '[' && text.back() == ']')
    return parse_nvidia_memory(tok);

  // Source modifiers: negation, logical not, absolute value.
  std::string_view body = text;
  while (!body.empty() && (body.front() == '-' || body.front() == '!' || body.front() == '~' ||
                           body.front() == '|')) {
    if (body.front() == '-' && is_immediate(body)) break;
    body.remove_prefix(1);
  }
  while (!body.empty() && body.back() == '|') body.remove_suffix(1);
  if (dialect_ == Dialect::kNvidia) {
    if (auto pos = body.find(".reuse"); pos != std::string_view::npos) body = body.substr(0, pos);
  }

  if (is_immediate(text)) {
    op.kind = Operand::Kind::kImmediate;
    return op;
  }
  if (auto reg = parse_register(body, tok.column)) {
    op.kind = Operand::Kind::kRegister;
    op.regs.push_back(*reg);
    return op;
  }

  const std::string l = lower(body);
  bool literal = false;
  switch (dialect_) {
    case Dialect::kNvidia:
      literal = body == "RZ" || body == "PT" || body == "URZ" || body == "UPT" ||
                starts_with(body, "SR_") || starts_with(body, "SB") || starts_with(body, "UP") ||
                starts_with(body, "c[") || starts_with(body, "cx[") || starts_with(body, "`(");
      break;
    case Dialect::kAmd: {
      static const char* const keywords[] = {"off", "glc", "slc", "dlc", "nt", "sc0", "sc1",
                                             "lds", "offen", "idxen", "addr64", "gds", "&"};
      literal = std::find(std::begin(keywords), std::end(keywords), l) != std::end(keywords) ||
                (body.find(':') != std::string_view::npos && !is_control) ||
                (body.find('(') != std::string_view::npos && body.back() == ')');
      break;
    }
    case Dialect::kIntel:
      literal = l == "null" || (body.front() == '(' && body.back() == ')') ||
                starts_with(l, "acc") || starts_with(l, "a0") || starts_with(l, "sr0") ||
                starts_with(l, "ce0") || starts_with(l, "tm0") || starts_with(l, "n0");
      break;
  }
  if (literal) {
    op.kind = Operand::Kind::kLiteral;
    return op;
  }
  if (is_control && is_identifier(text)) {
    op.kind = Operand::Kind::kLabel;
    return op;
  }
  fail(tok.column, tok.text, "unrecognized operand");
}

void LineParser::parse_annotations(std::string_view body, int column, Instruction& inst) {
  // Whitespace separates annotations; commas separate list items, so
  // "wait=B1, B2" continues the previous annotation.
  std::vector<Token> tokens;
  {
    size_t i = 0;
    while (i < body.size()) {
      while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
      if (i >= body.size()) break;
      const size_t start = i;
      while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i]))) ++i;
      Token tok{std::string(body.substr(start, i - start)), column + static_cast<int>(start)};
      const bool continues = !tokens.empty() && (tokens.back().text.back() == ',' || tok.text.front() == ',');
      if (continues && tok.text.find('=') == std::string::npos) {
        tokens.back().text += tok.text;
      } else {
        tokens.push_back(std::move(tok));
      }
    }
  }
  if (tokens.empty()) return;
  if (dialect_ == Dialect::kAmd) {
    fail(column, std::string(body), "amd listings express waits with s_waitcnt, not annotations");
  }

  auto parse_index_list = [&](const Token& tok, std::string_view values, uint32_t lo, uint32_t hi,
                              char prefix) {
    std::vector<uint32_t> out;
    size_t pos = 0;
    while (pos <= values.size()) {
      size_t next = values.find(',', pos);
      std::string_view item =
          values.substr(pos, next == std::string_view::npos ? values.npos : next - pos);
      if (prefix && !item.empty() && item.front() == prefix) item.remove_prefix(1);
      auto v = parse_uint(item);
      if (!v) fail(tok.column, tok.text, "expected index list");
      if (*v < lo || *v > hi) {
        fail(tok.column, tok.text,
             prefix == 'B' ? "barrier index out of range B1-B6" : "sbid index out of range 0-31");
      }
      out.push_back(static_cast<uint32_t>(*v));
      if (next == std::string_view::npos) break;
      pos = next + 1;
    }
    return out;
  };

  if (dialect_ == Dialect::kNvidia) {
    BarrierSync sync;
    for (const auto& tok : tokens) {
      auto eq = tok.text.find('=');
      if (eq == std::string::npos) fail(tok.column, tok.text, "expected key=value annotation");
      const std::string key = tok.text.substr(0, eq);
      const std::string_view value = std::string_view(tok.text).substr(eq + 1);
      if (key == "stall") {
        auto v = parse_uint(value);
        if (!v) fail(tok.column, tok.text, "stall expects a nonnegative integer");
        sync.stall = static_cast<uint32_t>(*v);
        continue;
      }
      BarrierMask* target = nullptr;
      if (key == "wait") target = &sync.wait_mask;
      else if (key == "read") target = &sync.read_set;
      else if (key == "write") target = &sync.write_set;
      else if (key == "depbar") target = &sync.depbar;
      else fail(tok.column, tok.text, "unknown annotation key '" + key + "'");
      for (uint32_t b : parse_index_list(tok, value, kMinBarrier, kMaxBarrier, 'B')) target->set(b);
    }
    inst.sync = sync;
    return;
  }

  SwsbSync sync;
  for (const auto& tok : tokens) {
    auto eq = tok.text.find('=');
    if (eq == std::string::npos) fail(tok.column, tok.text, "expected key=value annotation");
    const std::string key = tok.text.substr(0, eq);
    const std::string_view value = std::string_view(tok.text).substr(eq + 1);
    auto indices = parse_index_list(tok, value, 0, kMaxSbid, 0);
    if (key == "sbid.set") {
      if (indices.size() != 1) fail(tok.column, tok.text, "sbid.set takes a single token");
      sync.set_token = indices.front();
    } else if (key == "sbid.wait.dst") {
      for (uint32_t t : indices) sync.wait_dst.set(t);
    } else if (key == "sbid.wait.src") {
      for (uint32_t t : indices) sync.wait_src.set(t);
    } else {
      fail(tok.column, tok.text, "unknown annotation key '" + key + "'");
    }
  }
  inst.sync = sync;
}

void LineParser::parse_location(std::string_view body, int column, Instruction& inst) {
  auto frame_of = [&](std::string_view s) -> std::optional<SourceFrame> {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    auto colon = s.rfind(':');
    if (colon == std::string_view::npos || colon == 0) return std::nullopt;
    auto line = parse_uint(s.substr(colon + 1));
    if (!line || *line == 0) return std::nullopt;
    return SourceFrame{std::string(s.substr(0, colon)), static_cast<uint32_t>(*line)};
  };

  std::vector<std::string_view> parts;
  size_t pos = 0;
  while (true) {
    size_t next = body.find("<-", pos);
    parts.push_back(body.substr(pos, next == std::string_view::npos ? body.npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 2;
  }
  auto first = frame_of(parts.front());
  if (!first) {
    // Free-form trailing comment, not a location.
    if (parts.size() == 1) return;
    fail(column, std::string(body), "malformed source location");
  }
  SourceLocation loc{first->file, first->line, {}};
  for (size_t i = 1; i < parts.size(); ++i) {
    auto frame = frame_of(parts[i]);
    if (!frame) fail(column, std::string(parts[i]), "malformed inline frame");
    loc.inline_stack.push_back(*frame);
  }
  inst.src_loc = std::move(loc);
}

void LineParser::decode_waitcnt(const std::vector<Token>& tokens, Instruction& inst) {
  WaitcntSync sync;
  for (const auto& tok : tokens) {
    const std::string l = lower(tok.text);
    if (l == "&") continue;
    if (l == "0") {
      sync.vmcnt = 0;
      sync.lgkmcnt = 0;
      continue;
    }
    auto open = l.find('(');
    if (open == std::string::npos || l.back() != ')')
      fail(tok.column, tok.text, "expected vmcnt(N), lgkmcnt(N) or expcnt(N)");
    const std::string name = l.substr(0, open);
    auto value = parse_uint(std::string_view(l).substr(open + 1, l.size() - open - 2));
    if (!value) fail(tok.column, tok.text, "counter value must be a nonnegative integer");
    if (name == "vmcnt") sync.vmcnt = static_cast<uint32_t>(*value);
    else if (name == "lgkmcnt") sync.lgkmcnt = static_cast<uint32_t>(*value);
    else if (name != "expcnt") fail(tok.column, tok.text, "unknown counter '" + name + "'");
  }
  inst.sync = sync;
}

// Decides which operands are written. The first operand is the destination
// when it is a plain register and the opcode class writes registers.
void LineParser::assign_roles(Instruction& inst, const std::vector<Token>& tokens) {
  (void)tokens;
  const std::string& m = mnemonic_lower_;
  bool has_dest = !writes_no_register(inst.opcode_class);
  if (dialect_ == Dialect::kAmd) {
    if (starts_with(m, "s_cmp") || starts_with(m, "s_bitcmp")) has_dest = false;
    if (inst.opcode_class == OpcodeClass::kAtomic) {
      has_dest = std::any_of(inst.operands.begin(), inst.operands.end(), [](const Operand& op) {
        const std::string t = lower(op.text);
        return t == "glc" || t == "sc0";
      });
    }
  }

  // NVIDIA data registers of 64-bit opcodes are pairs unless written explicitly.
  uint32_t implied_span = 1;
  bool wide_dest_only = false;
  if (dialect_ == Dialect::kNvidia) {
    const std::string upper_base = inst.mnemonic.substr(0, inst.mnemonic.find('.'));
    if (inst.opcode_class == OpcodeClass::kFpArith && !upper_base.empty() &&
        (upper_base[0] == 'D' || upper_base[0] == 'd')) {
      implied_span = 2;
    }
    if (inst.mnemonic.find(".64") != std::string::npos) implied_span = 2;
    if (inst.mnemonic.find(".128") != std::string::npos) implied_span = 4;
    if (inst.mnemonic.find(".WIDE") != std::string::npos) wide_dest_only = true;
  }

  size_t first = 0;
  // Skip execution-size/mask literals such as Intel's (16).
  while (first < inst.operands.size() && inst.operands[first].kind == Operand::Kind::kLiteral &&
         !inst.operands[first].text.empty() && inst.operands[first].text.front() == '(') {
    ++first;
  }

  size_t reg_operand_ordinal = 0;
  for (size_t i = 0; i < inst.operands.size(); ++i) {
    Operand& op = inst.operands[i];
    const bool is_dest = has_dest && i == first && op.kind == Operand::Kind::kRegister;
    if (op.kind == Operand::Kind::kRegister) {
      for (auto& reg : op.regs) {
        const bool explicit_span = op.text.find(":+") != std::string::npos;
        if (!explicit_span && reg.cls == RegClass::kVectorGpr && reg.span == 1) {
          if (implied_span > 1) reg.span = implied_span;
          // IMAD.WIDE: 64-bit destination and addend (last operand).
          if (wide_dest_only && (is_dest || i + 1 == inst.operands.size())) reg.span = 2;
        }
      }
      ++reg_operand_ordinal;
    }
    if (is_dest) {
      inst.dests.insert(inst.dests.end(), op.regs.begin(), op.regs.end());
      continue;
    }
    for (const auto& reg : op.regs) {
      if (std::find(inst.srcs.begin(), inst.srcs.end(), reg) == inst.srcs.end())
        inst.srcs.push_back(reg);
    }
  }

  // Address operands: bracketed NVIDIA memory operands, otherwise the first
  // source register of a memory instruction.
  const bool memory_op = is_load_like(inst.opcode_class) ||
                         inst.opcode_class == OpcodeClass::kGlobalStore ||
                         inst.opcode_class == OpcodeClass::kLocalStore;
  for (size_t i = 0; i < inst.operands.size(); ++i) {
    const Operand& op = inst.operands[i];
    if (op.kind == Operand::Kind::kMemory) {
      inst.address_srcs.insert(inst.address_srcs.end(), op.regs.begin(), op.regs.end());
    }
  }
  if (inst.address_srcs.empty() && memory_op && dialect_ != Dialect::kNvidia) {
    for (size_t i = 0; i < inst.operands.size(); ++i) {
      const Operand& op = inst.operands[i];
      if (op.kind != Operand::Kind::kRegister) continue;
      if (has_dest && i == first) continue;
      inst.address_srcs = op.regs;
      break;
    }
  }

  // Implicit condition-code operands on AMD scalar compares and branches.
  if (dialect_ == Dialect::kAmd) {
    const RegisterRef scc{RegClass::kSpecial, 4, 1};
    const RegisterRef vcc{RegClass::kSpecial, 0, 2};
    const RegisterRef exec{RegClass::kSpecial, 2, 2};
    if (starts_with(m, "s_cmp") || starts_with(m, "s_bitcmp")) inst.dests.push_back(scc);
    if (starts_with(m, "s_cbranch_scc") || starts_with(m, "s_cselect")) inst.srcs.push_back(scc);
    if (starts_with(m, "s_cbranch_vcc")) inst.srcs.push_back(vcc);
    if (starts_with(m, "s_cbranch_exec")) inst.srcs.push_back(exec);
  }
}

Instruction LineParser::parse(std::string_view line, std::optional<uint64_t> default_offset,
                              bool* explicit_offset) {
  Instruction inst;
  inst.dialect = dialect_;
  *explicit_offset = false;

  auto column_of = [&](std::string_view part) {
    return static_cast<int>(part.data() - line.data()) + 1;
  };
  auto skip_ws = [](std::string_view& s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  };
  auto trim_back = [](std::string_view& s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  };

  std::string_view rest = line;
  skip_ws(rest);

  if (starts_with(rest, "/*")) {
    auto close = rest.find("*/");
    if (close == std::string_view::npos) fail(column_of(rest), "/*", "unterminated offset comment");
    std::string_view hex = rest.substr(2, close - 2);
    if (starts_with(hex, "0x") || starts_with(hex, "0X")) hex.remove_prefix(2);
    auto value = parse_uint(hex, 16);
    if (!value) fail(column_of(rest), std::string(rest.substr(0, close + 2)), "bad hex offset");
    inst.offset = *value;
    *explicit_offset = true;
    rest.remove_prefix(close + 2);
    skip_ws(rest);
  } else {
    inst.offset = default_offset.value_or(0);
  }

  // Trailing source-location comment.
  if (auto slash = rest.find("//"); slash != std::string_view::npos) {
    std::string_view comment = rest.substr(slash + 2);
    rest = rest.substr(0, slash);
    parse_location(comment, column_of(comment), inst);
  }
  trim_back(rest);
  if (!rest.empty() && rest.back() == ';') {
    rest.remove_suffix(1);
    trim_back(rest);
  }

  std::string_view annotations;
  bool has_annotations = false;
  if (!rest.empty() && rest.back() == '}') {
    auto open = rest.rfind('{');
    if (open == std::string_view::npos) fail(column_of(rest), "}", "unbalanced '}'");
    annotations = rest.substr(open + 1, rest.size() - open - 2);
    has_annotations = true;
    rest = rest.substr(0, open);
    trim_back(rest);
  } else if (rest.find('{') != std::string_view::npos) {
    fail(column_of(rest.substr(rest.find('{'))), "{", "unterminated sync annotation");
  }

  if (!rest.empty() && rest.front() == '@') {
    size_t end = 1;
    while (end < rest.size() && !std::isspace(static_cast<unsigned char>(rest[end]))) ++end;
    std::string_view guard_text = rest.substr(0, end);
    std::string_view name = guard_text.substr(1);
    bool negated = false;
    if (!name.empty() && name.front() == '!') {
      negated = true;
      name.remove_prefix(1);
    }
    if (dialect_ == Dialect::kAmd) fail(column_of(rest), std::string(guard_text), "amd has no guard predicates");
    if (name != "PT") {
      auto reg = parse_register(name, column_of(rest));
      if (!reg || reg->cls != RegClass::kPredicate)
        fail(column_of(rest), std::string(guard_text), "guard must be a predicate register");
      inst.guard = Guard{*reg, negated};
    }
    rest.remove_prefix(end);
    skip_ws(rest);
  }

  if (rest.empty()) fail(column_of(line), std::string(line), "missing mnemonic");
  size_t mend = 0;
  while (mend < rest.size() && !std::isspace(static_cast<unsigned char>(rest[mend]))) ++mend;
  inst.mnemonic = std::string(rest.substr(0, mend));
  if (!is_identifier(inst.mnemonic) && !std::isalnum(static_cast<unsigned char>(inst.mnemonic[0]))) {
    fail(column_of(rest), inst.mnemonic, "invalid mnemonic");
  }
  mnemonic_lower_ = lower(inst.mnemonic);
  inst.opcode_class = table_.classify(inst.mnemonic);
  const bool is_control = inst.opcode_class == OpcodeClass::kControlFlow;
  if (is_control) inst.control = control_kind(dialect_, inst.mnemonic, inst.guard.has_value());

  std::string_view operand_text = rest.substr(mend);
  auto tokens = split_operands(operand_text, column_of(operand_text));

  const bool is_waitcnt = dialect_ == Dialect::kAmd && mnemonic_lower_ == "s_waitcnt";
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (is_waitcnt) {
      inst.operands.push_back(Operand{Operand::Kind::kLiteral, tokens[i].text, {}});
      continue;
    }
    inst.operands.push_back(parse_operand(tokens[i], is_control, i));
  }
  if (is_waitcnt) decode_waitcnt(tokens, inst);

  if (is_control && (inst.control == ControlKind::kBranch || inst.control == ControlKind::kCondBranch)) {
    for (auto it = inst.operands.rbegin(); it != inst.operands.rend(); ++it) {
      if (it->kind == Operand::Kind::kLabel) {
        inst.target = it->text;
        break;
      }
    }
    if (!inst.target) fail(column_of(rest), inst.mnemonic, "branch without a label target");
  }

  if (has_annotations) parse_annotations(annotations, column_of(annotations), inst);
  assign_roles(inst, tokens);
  return inst;
}

uint64_t default_stride(Dialect dialect) { return dialect == Dialect::kAmd ? 4 : 16; }

}  // namespace

std::vector<ParsedKernel> parse_listing(Dialect dialect, std::string_view text,
                                        const ParseOptions& options) {
  const OpcodeTable& table =
      options.opcode_table ? *options.opcode_table : OpcodeTable::builtin(dialect);
  std::vector<ParsedKernel> kernels;
  std::vector<std::string> pending_labels;
  bool have_last = false;  // an instruction precedes in this kernel
  uint64_t last_offset = 0;

  auto flush_labels = [&](size_t index) {
    for (auto& label : pending_labels) kernels.back().labels[label] = index;
    pending_labels.clear();
  };

  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);

    std::string_view line = raw;
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    const int indent = static_cast<int>(line.data() - raw.data());
    if (line.empty() || starts_with(line, "//") || line.front() == '#') continue;

    if (starts_with(line, ".kernel")) {
      std::string_view name = line.substr(7);
      while (!name.empty() && std::isspace(static_cast<unsigned char>(name.front()))) name.remove_prefix(1);
      if (line.size() > 7 && !std::isspace(static_cast<unsigned char>(line[7])))
        throw SyntaxError(options.source_name, line_no, indent + 1, std::string(line), "unknown directive");
      if (name.empty() || !is_identifier(name)) {
        throw SyntaxError(options.source_name, line_no, indent + 9, std::string(name),
                          "expected kernel name after .kernel");
      }
      for (const auto& k : kernels) {
        if (k.name == name)
          throw SyntaxError(options.source_name, line_no, indent + 9, std::string(name),
                            "duplicate kernel section");
      }
      if (!kernels.empty()) flush_labels(kernels.back().instructions.size());
      kernels.push_back(ParsedKernel{std::string(name), dialect, {}, {}});
      have_last = false;
      continue;
    }

    if (line.back() == ':' && is_identifier(line.substr(0, line.size() - 1))) {
      if (kernels.empty())
        throw SyntaxError(options.source_name, line_no, indent + 1, std::string(line),
                          "label outside of a .kernel section");
      std::string label(line.substr(0, line.size() - 1));
      if (kernels.back().labels.count(label) ||
          std::find(pending_labels.begin(), pending_labels.end(), label) != pending_labels.end()) {
        throw SyntaxError(options.source_name, line_no, indent + 1, label, "duplicate label");
      }
      pending_labels.push_back(std::move(label));
      continue;
    }

    if (line.front() == '.')
      throw SyntaxError(options.source_name, line_no, indent + 1, std::string(line),
                        "unknown directive");
    if (kernels.empty())
      throw SyntaxError(options.source_name, line_no, indent + 1, std::string(line),
                        "instruction outside of a .kernel section");

    LineParser parser(dialect, table, options.source_name, line_no);
    std::optional<uint64_t> next_default;
    if (have_last) next_default = last_offset + default_stride(dialect);
    bool explicit_offset = false;
    Instruction inst = parser.parse(raw, next_default, &explicit_offset);
    if (have_last && inst.offset <= last_offset) {
      throw SyntaxError(options.source_name, line_no, indent + 1, std::string(line),
                        inst.offset == last_offset ? "duplicate offset" : "offsets must increase");
    }
    last_offset = inst.offset;
    have_last = true;
    auto& kernel = kernels.back();
    flush_labels(kernel.instructions.size());
    kernel.instructions.push_back(std::move(inst));
  }
  if (!kernels.empty()) flush_labels(kernels.back().instructions.size());
  return kernels;
}

namespace {

std::string mask_list(const BarrierMask& mask) {
  std::string out;
  for (uint32_t b = kMinBarrier; b <= kMaxBarrier; ++b) {
    if (!mask.test(b)) continue;
    if (!out.empty()) out += ",";
    out += "B" + std::to_string(b);
  }
  return out;
}

std::string token_list(const TokenMask& mask) {
  std::string out;
  for (uint32_t t = 0; t <= kMaxSbid; ++t) {
    if (!mask.test(t)) continue;
    if (!out.empty()) out += ",";
    out += std::to_string(t);
  }
  return out;
}

}  // namespace

std::string format_instruction(const Instruction& inst) {
  std::ostringstream out;
  char buf[32];
  std::snprintf(buf, sizeof buf, "/*%04llx*/", static_cast<unsigned long long>(inst.offset));
  out << buf << ' ';
  if (inst.guard) {
    out << '@' << (inst.guard->negated ? "!" : "") << format_register(inst.guard->reg, inst.dialect)
        << ' ';
  }
  out << inst.mnemonic;
  for (size_t i = 0; i < inst.operands.size(); ++i) {
    out << (i == 0 ? " " : ", ") << inst.operands[i].text;
  }
  if (const auto* b = inst.barrier()) {
    std::vector<std::string> parts;
    if (b->wait_mask.any()) parts.push_back("wait=" + mask_list(b->wait_mask));
    if (b->read_set.any()) parts.push_back("read=" + mask_list(b->read_set));
    if (b->write_set.any()) parts.push_back("write=" + mask_list(b->write_set));
    if (b->depbar.any()) parts.push_back("depbar=" + mask_list(b->depbar));
    if (b->stall) parts.push_back("stall=" + std::to_string(*b->stall));
    if (!parts.empty()) {
      out << " {";
      for (size_t i = 0; i < parts.size(); ++i) out << (i ? " " : "") << parts[i];
      out << '}';
    }
  } else if (const auto* s = inst.swsb()) {
    std::vector<std::string> parts;
    if (s->set_token) parts.push_back("sbid.set=" + std::to_string(*s->set_token));
    if (s->wait_dst.any()) parts.push_back("sbid.wait.dst=" + token_list(s->wait_dst));
    if (s->wait_src.any()) parts.push_back("sbid.wait.src=" + token_list(s->wait_src));
    if (!parts.empty()) {
      out << " {";
      for (size_t i = 0; i < parts.size(); ++i) out << (i ? " " : "") << parts[i];
      out << '}';
    }
  }
  if (inst.src_loc) out << " // " << format_location(*inst.src_loc);
  return out.str();
}

std::string format_listing(const std::vector<ParsedKernel>& kernels) {
  std::ostringstream out;
  for (const auto& kernel : kernels) {
    out << ".kernel " << kernel.name << '\n';
    std::multimap<size_t, std::string> by_index;
    for (const auto& [label, index] : kernel.labels) by_index.emplace(index, label);
    for (size_t i = 0; i <= kernel.instructions.size(); ++i) {
      auto [lo, hi] = by_index.equal_range(i);
      for (auto it = lo; it != hi; ++it) out << it->second << ":\n";
      if (i < kernel.instructions.size()) out << "  " << format_instruction(kernel.instructions[i]) << '\n';
    }
  }
  return out.str();
}

}  // namespace stallslice
