// Copyright 2026 The stallslice Authors
// SPDX-License-Identifier: Apache-2.0

#include "stallslice/config.h"

#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <fstream>
#include <sstream>

namespace stallslice {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<size_t> parse_size(std::string_view s) {
  size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<bool> parse_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  return std::nullopt;
}

std::optional<double> parse_positive(std::string_view s) {
  const std::string copy(s);
  char* end = nullptr;
  const double v = std::strtod(copy.c_str(), &end);
  if (copy.empty() || end != copy.c_str() + copy.size() || !(v > 0.0) || v == HUGE_VAL) return std::nullopt;
  return v;
}

}  // namespace

std::bitset<4> parse_stage_list(std::string_view text) {
  std::bitset<4> out;
  text = trim(text);
  if (text.empty() || text == "none") return out;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t comma = text.find(',', pos);
    std::string_view item = trim(text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos));
    auto v = parse_size(item);
    if (!v || *v < 1 || *v > 4)
      throw InputError("invalid stage '" + std::string(item) + "' (expected a list of 1-4, e.g. 1,3)");
    out.set(*v - 1);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

void apply_config(std::string_view text, AnalysisOptions& options, const std::string& source_name) {
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::string_view line = trim(raw);
    if (line.empty()) continue;
    const std::string where = source_name + ":" + std::to_string(line_no) + ": ";
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw InputError(where + "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    auto bad = [&](const char* expected) -> InputError {
      return InputError(where + "'" + key + "' expects " + expected + ", got '" + std::string(value) + "'");
    };

    if (key == "stages") {
      try {
        options.prune.stages = parse_stage_list(value);
      } catch (const InputError& e) {
        throw InputError(where + e.what());
      }
    } else if (key == "prune_exec") {
      auto b = parse_bool(value);
      if (!b) throw bad("true or false");
      options.prune.prune_exec = *b;
    } else if (key == "include_unsampled") {
      auto b = parse_bool(value);
      if (!b) throw bad("true or false");
      options.include_unsampled = *b;
    } else if (key == "liveness") {
      auto b = parse_bool(value);
      if (!b) throw bad("true or false");
      options.graph.liveness = *b;
    } else if (key == "max_paths" || key == "max_depth" || key == "scan_cap" || key == "top" ||
               key == "chain_depth") {
      auto v = parse_size(value);
      if (!v || (*v == 0 && key != "top" && key != "chain_depth")) throw bad("a positive integer");
      if (key == "max_paths") options.prune.max_paths = *v;
      if (key == "max_depth") options.prune.max_depth = *v;
      if (key == "scan_cap") options.graph.scan_cap = *v;
      if (key == "top") options.top_n = *v;
      if (key == "chain_depth") options.chain_depth = *v;
    } else if (key.rfind("latency.", 0) == 0) {
      std::string_view rest = std::string_view(key).substr(8);
      std::optional<Dialect> dialect;
      if (auto dot = rest.find('.'); dot != std::string_view::npos) {
        dialect = dialect_from_string(rest.substr(0, dot));
        if (!dialect) throw InputError(where + "unknown dialect in '" + key + "'");
        rest = rest.substr(dot + 1);
      }
      auto cls = opcode_class_from_string(rest);
      if (!cls) throw InputError(where + "unknown opcode class in '" + key + "'");
      auto v = parse_positive(value);
      if (!v) throw bad("a positive number");
      for (Dialect d : {Dialect::kNvidia, Dialect::kAmd, Dialect::kIntel}) {
        if (!dialect || *dialect == d) options.prune.table(d).set(*cls, *v);
      }
    } else {
      throw InputError(where + "unknown setting '" + key + "'");
    }
  }
}

void apply_config_file(const std::string& path, AnalysisOptions& options) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  apply_config(buf.str(), options, path);
}

}  // namespace stallslice
