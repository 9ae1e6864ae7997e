// Copyright 2026 The Mist Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mist/coverage.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "mist/error.h"
#include "mist/json_util.h"

namespace mist {

Counts CoverageSnapshot::lines() const {
  Counts c;
  for (const auto& [_, f] : files) {
    for (const auto& [__, hit] : f.lines) {
      ++c.instrumented;
      c.covered += hit;
    }
  }
  return c;
}

Counts CoverageSnapshot::functions() const {
  Counts c;
  for (const auto& [_, f] : files) {
    for (const auto& [__, fn] : f.functions) {
      ++c.instrumented;
      c.covered += fn.covered;
    }
  }
  return c;
}

Counts CoverageSnapshot::branches() const {
  Counts c;
  for (const auto& [_, f] : files) {
    for (const auto& [__, hit] : f.branches) {
      ++c.instrumented;
      c.covered += hit;
    }
  }
  return c;
}

Rates CoverageSnapshot::rates() const {
  return {lines().rate(), functions().rate(), branches().rate()};
}

std::set<std::pair<std::string, BranchId>> CoverageSnapshot::covered_branches() const {
  std::set<std::pair<std::string, BranchId>> out;
  for (const auto& [name, f] : files) {
    for (const auto& [id, hit] : f.branches) {
      if (hit) out.emplace(name, id);
    }
  }
  return out;
}

namespace {

[[noreturn]] void fail(const std::string& origin, size_t line_no, const std::string& what) {
  throw ParseError(origin + ":" + std::to_string(line_no) + ": " + what);
}

template <typename T>
T parse_number(std::string_view s, const std::string& origin, size_t line_no) {
  T value{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    fail(origin, line_no, "expected a number, got '" + std::string(s) + "'");
  }
  return value;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(),
                                   [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

}  // namespace

CoverageSnapshot parse_lcov_text(std::string_view text, const std::string& origin) {
  CoverageSnapshot snap;
  FileCoverage* current = nullptr;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line == "end_of_record") {
      if (!current) fail(origin, line_no, "end_of_record outside a record");
      current = nullptr;
      continue;
    }
    const size_t colon = line.find(':');
    if (colon == std::string_view::npos) fail(origin, line_no, "malformed line");
    const std::string_view key = line.substr(0, colon);
    const std::string_view value = line.substr(colon + 1);
    if (key == "TN" || key == "VER") continue;
    if (key == "SF") {
      if (value.empty()) fail(origin, line_no, "empty source file name");
      current = &snap.files[std::string(value)];
      continue;
    }
    if (key == "LF" || key == "LH" || key == "FNF" || key == "FNH" || key == "BRF" ||
        key == "BRH") {
      if (!current) fail(origin, line_no, std::string(key) + " outside a record");
      parse_number<uint64_t>(value, origin, line_no);
      continue;
    }
    if (!current) fail(origin, line_no, std::string(key) + " outside a record");
    if (key == "FN") {
      const size_t c1 = value.find(',');
      if (c1 == std::string_view::npos) fail(origin, line_no, "FN needs <line>,<name>");
      const int fline = parse_number<int>(value.substr(0, c1), origin, line_no);
      std::string_view name = value.substr(c1 + 1);
      const size_t c2 = name.find(',');
      if (c2 != std::string_view::npos && all_digits(name.substr(0, c2))) {
        name = name.substr(c2 + 1);  // FN:<start>,<end>,<name>
      }
      if (name.empty()) fail(origin, line_no, "FN with empty name");
      auto& fn = current->functions[std::string(name)];
      fn.line = fline;
    } else if (key == "FNDA") {
      const size_t c1 = value.find(',');
      if (c1 == std::string_view::npos) fail(origin, line_no, "FNDA needs <count>,<name>");
      const auto count = parse_number<uint64_t>(value.substr(0, c1), origin, line_no);
      const std::string name(value.substr(c1 + 1));
      if (name.empty()) fail(origin, line_no, "FNDA with empty name");
      auto& fn = current->functions[name];
      fn.covered = fn.covered || count > 0;
    } else if (key == "DA") {
      const size_t c1 = value.find(',');
      if (c1 == std::string_view::npos) fail(origin, line_no, "DA needs <line>,<count>");
      const int dline = parse_number<int>(value.substr(0, c1), origin, line_no);
      std::string_view count = value.substr(c1 + 1);
      const size_t c2 = count.find(',');  // optional checksum
      if (c2 != std::string_view::npos) count = count.substr(0, c2);
      bool hit;
      if (!count.empty() && count.front() == '-') {
        // Some gcov versions emit negative counts on overflow; treat as hit.
        parse_number<int64_t>(count, origin, line_no);
        hit = true;
      } else {
        hit = parse_number<uint64_t>(count, origin, line_no) > 0;
      }
      bool& slot = current->lines[dline];
      slot = slot || hit;
    } else if (key == "BRDA") {
      const size_t c1 = value.find(',');
      const size_t c2 = c1 == std::string_view::npos ? c1 : value.find(',', c1 + 1);
      const size_t c3 = value.rfind(',');
      if (c1 == std::string_view::npos || c2 == std::string_view::npos || c3 <= c2) {
        fail(origin, line_no, "BRDA needs <line>,<block>,<branch>,<taken>");
      }
      BranchId id;
      id.line = parse_number<int>(value.substr(0, c1), origin, line_no);
      id.block = std::string(value.substr(c1 + 1, c2 - c1 - 1));
      id.branch = std::string(value.substr(c2 + 1, c3 - c2 - 1));
      const std::string_view taken = value.substr(c3 + 1);
      const bool hit = taken != "-" && parse_number<uint64_t>(taken, origin, line_no) > 0;
      bool& slot = current->branches[id];
      slot = slot || hit;
    } else {
      fail(origin, line_no, "unknown record '" + std::string(key) + "'");
    }
  }
  if (current) fail(origin, line_no, "missing end_of_record");
  return snap;
}

CoverageSnapshot parse_lcov(const std::filesystem::path& path) {
  return parse_lcov_text(read_text_file(path), path.string());
}

std::string render_lcov(const CoverageSnapshot& snapshot) {
  std::ostringstream out;
  for (const auto& [name, f] : snapshot.files) {
    out << "TN:\nSF:" << name << "\n";
    std::vector<std::pair<int, std::string>> fns;
    for (const auto& [fname, fn] : f.functions) fns.emplace_back(fn.line, fname);
    std::sort(fns.begin(), fns.end());
    size_t fnh = 0;
    for (const auto& [line, fname] : fns) out << "FN:" << line << "," << fname << "\n";
    for (const auto& [line, fname] : fns) {
      const bool hit = f.functions.at(fname).covered;
      fnh += hit;
      out << "FNDA:" << (hit ? 1 : 0) << "," << fname << "\n";
    }
    out << "FNF:" << fns.size() << "\nFNH:" << fnh << "\n";
    size_t brh = 0;
    for (const auto& [id, hit] : f.branches) {
      brh += hit;
      out << "BRDA:" << id.line << "," << id.block << "," << id.branch << ","
          << (hit ? "1" : "-") << "\n";
    }
    out << "BRF:" << f.branches.size() << "\nBRH:" << brh << "\n";
    size_t lh = 0;
    for (const auto& [line, hit] : f.lines) {
      lh += hit;
      out << "DA:" << line << "," << (hit ? 1 : 0) << "\n";
    }
    out << "LF:" << f.lines.size() << "\nLH:" << lh << "\nend_of_record\n";
  }
  return out.str();
}

namespace {

template <typename K, typename V>
bool same_keys(const std::map<K, V>& a, const std::map<K, V>& b) {
  if (a.size() != b.size()) return false;
  return std::equal(a.begin(), a.end(), b.begin(),
                    [](const auto& x, const auto& y) { return x.first == y.first; });
}

}  // namespace

CoverageSnapshot merge(const CoverageSnapshot& a, const CoverageSnapshot& b) {
  CoverageSnapshot out = a;
  for (const auto& [name, fb] : b.files) {
    auto it = out.files.find(name);
    if (it == out.files.end()) {
      out.files.emplace(name, fb);
      continue;
    }
    FileCoverage& fa = it->second;
    if (!same_keys(fa.lines, fb.lines) || !same_keys(fa.functions, fb.functions) ||
        !same_keys(fa.branches, fb.branches)) {
      throw UniverseMismatch("instrumentation differs for " + name);
    }
    for (auto& [line, hit] : fa.lines) hit = hit || fb.lines.at(line);
    for (auto& [fname, fn] : fa.functions) fn.covered = fn.covered || fb.functions.at(fname).covered;
    for (auto& [id, hit] : fa.branches) hit = hit || fb.branches.at(id);
  }
  return out;
}

uint64_t diff_new_branches(const CoverageSnapshot& cumulative, const CoverageSnapshot& run) {
  uint64_t n = 0;
  for (const auto& [name, fr] : run.files) {
    auto it = cumulative.files.find(name);
    if (it != cumulative.files.end() && !same_keys(it->second.branches, fr.branches)) {
      throw UniverseMismatch("branch instrumentation differs for " + name);
    }
    for (const auto& [id, hit] : fr.branches) {
      if (!hit) continue;
      if (it == cumulative.files.end() || !it->second.branches.at(id)) ++n;
    }
  }
  return n;
}

bool glob_match(std::string_view p, std::string_view t) {
  while (!p.empty()) {
    if (p.substr(0, 2) == "**") {
      std::string_view rest = p.substr(2);
      // "**/" also matches no directories at all.
      if (!rest.empty() && rest[0] == '/' && glob_match(rest.substr(1), t)) return true;
      for (size_t i = 0; i <= t.size(); ++i) {
        if (glob_match(rest, t.substr(i))) return true;
      }
      return false;
    }
    if (p[0] == '*') {
      for (size_t i = 0; i <= t.size(); ++i) {
        if (glob_match(p.substr(1), t.substr(i))) return true;
        if (i < t.size() && t[i] == '/') break;
      }
      return false;
    }
    if (t.empty() || (p[0] == '?' ? t[0] == '/' : p[0] != t[0])) return false;
    p.remove_prefix(1);
    t.remove_prefix(1);
  }
  return t.empty();
}

ModuleMap ModuleMap::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("module map must be a JSON array");
  ModuleMap map;
  const auto& known = standard_modules();
  for (const auto& e : j) {
    Entry entry;
    entry.module = e.at("module").get<std::string>();
    if (std::find(known.begin(), known.end(), entry.module) == known.end()) {
      throw ConfigError("unknown module '" + entry.module + "'");
    }
    entry.globs = e.at("globs").get<std::vector<std::string>>();
    map.entries.push_back(std::move(entry));
  }
  return map;
}

ModuleMap ModuleMap::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

nlohmann::json ModuleMap::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : entries) j.push_back({{"module", e.module}, {"globs", e.globs}});
  return j;
}

std::vector<ModuleCounts> module_rates(const CoverageSnapshot& snapshot, const ModuleMap& map) {
  const auto& names = standard_modules();
  std::vector<ModuleCounts> rows;
  for (const auto& n : names) rows.push_back({n, {}, {}, {}});
  auto row_of = [&](const std::string& module) -> ModuleCounts& {
    return rows[static_cast<size_t>(std::find(names.begin(), names.end(), module) - names.begin())];
  };
  auto classify = [&](const std::string& file, const std::string& function) -> ModuleCounts& {
    for (const auto& e : map.entries) {
      for (const auto& g : e.globs) {
        const bool hit = g.rfind("fn:", 0) == 0 ? (!function.empty() && glob_match(g.substr(3), function))
                                                : glob_match(g, file);
        if (hit) return row_of(e.module);
      }
    }
    return row_of("Other");
  };

  for (const auto& [file, f] : snapshot.files) {
    // Enclosing function of a line: the one with the greatest start <= line.
    std::map<int, std::string> starts;
    for (const auto& [fname, fn] : f.functions) starts.emplace(fn.line, fname);
    auto enclosing = [&](int line) -> std::string {
      auto it = starts.upper_bound(line);
      if (it == starts.begin()) return {};
      return std::prev(it)->second;
    };
    for (const auto& [line, hit] : f.lines) {
      auto& row = classify(file, enclosing(line));
      ++row.lines.instrumented;
      row.lines.covered += hit;
    }
    for (const auto& [fname, fn] : f.functions) {
      auto& row = classify(file, fname);
      ++row.functions.instrumented;
      row.functions.covered += fn.covered;
    }
    for (const auto& [id, hit] : f.branches) {
      auto& row = classify(file, enclosing(id.line));
      ++row.branches.instrumented;
      row.branches.covered += hit;
    }
  }
  return rows;
}

PlateauDetector::PlateauDetector(size_t window, uint64_t threshold)
    : window_(window), threshold_(threshold) {
  if (window_ == 0) throw ConfigError("plateau window must be positive");
}

bool PlateauDetector::push(uint64_t gain) {
  gains_.push_back(gain);
  if (gains_.size() > window_) gains_.pop_front();
  if (gains_.size() < window_) return false;
  uint64_t sum = 0;
  for (auto g : gains_) sum += g;
  return sum < threshold_;
}

bool plateau(PlateauDetector& detector, uint64_t gain) { return detector.push(gain); }

uint64_t stable_hash(std::string_view text, uint64_t seed) {
  uint64_t h = 1469598103934665603ULL ^ (seed * 0x9e3779b97f4a7c15ULL);
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return h;
}

SyntheticOracleConfig SyntheticOracleConfig::from_json(const nlohmann::json& j) {
  SyntheticOracleConfig cfg;
  cfg.universe = j.value("universe", cfg.universe);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.default_fanout = j.value("default_fanout", cfg.default_fanout);
  if (j.contains("mapping")) {
    cfg.mapping = j["mapping"].get<std::map<std::string, std::vector<size_t>>>();
  }
  if (j.contains("combos")) {
    for (const auto& c : j["combos"]) {
      cfg.combos.push_back({c.at("features").get<std::vector<std::string>>(),
                            c.at("branches").get<std::vector<size_t>>()});
    }
  }
  return cfg;
}

SyntheticOracle::SyntheticOracle(SyntheticOracleConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.universe == 0) throw ConfigError("synthetic universe must be positive");
  auto check = [&](const std::vector<size_t>& ids) {
    for (auto b : ids) {
      if (b >= cfg_.universe) throw ConfigError("synthetic branch id outside the universe");
    }
  };
  for (const auto& [_, ids] : cfg_.mapping) check(ids);
  for (const auto& c : cfg_.combos) check(c.branches);
}

namespace {

constexpr const char* kSyntheticFiles[] = {"synthetic/parser.c", "synthetic/optimizer.c",
                                           "synthetic/executor.c", "synthetic/storage.c"};

}  // namespace

ModuleMap SyntheticOracle::module_map() {
  ModuleMap map;
  map.entries = {{"Parser", {"synthetic/parser.c"}},
                 {"Optimizer", {"synthetic/optimizer.c"}},
                 {"Executor", {"synthetic/executor.c"}},
                 {"Storage", {"synthetic/storage.c"}}};
  return map;
}

std::set<std::string> case_features(const TestCase& tc) {
  std::set<std::string> out;
  for (const auto& s : tc.statements) {
    out.insert(std::string("kind:") + to_string(s.kind));
    const auto sig = s.significant_tokens();
    for (size_t k = 0; k < sig.size(); ++k) {
      const size_t i = sig[k];
      switch (s.tokens[i].kind) {
        case TokenKind::kKeyword:
          out.insert(s.upper(i));
          break;
        case TokenKind::kIdentifier:
          if (k + 1 < sig.size() && s.token_text(sig[k + 1]) == "(") {
            out.insert("fn:" + s.upper(i));
          }
          break;
        case TokenKind::kOperator:
          out.insert("op:" + std::string(s.token_text(i)));
          break;
        default:
          break;
      }
    }
  }
  if (const auto* m = std::get_if<Mutated>(&tc.provenance)) {
    out.insert("seed:" + m->parent_id);
    for (const auto& r : m->rules) out.insert("rule:" + r);
  }
  return out;
}

std::set<size_t> SyntheticOracle::branches_for(const std::set<std::string>& features) const {
  std::set<size_t> hit;
  for (const auto& f : features) {
    auto it = cfg_.mapping.find(f);
    if (it != cfg_.mapping.end()) {
      hit.insert(it->second.begin(), it->second.end());
      continue;
    }
    for (size_t k = 0; k < cfg_.default_fanout; ++k) {
      hit.insert(stable_hash(f + "#" + std::to_string(k), cfg_.seed) % cfg_.universe);
    }
  }
  for (const auto& combo : cfg_.combos) {
    const bool all = std::all_of(combo.features.begin(), combo.features.end(),
                                 [&](const std::string& f) { return features.count(f) > 0; });
    if (all) hit.insert(combo.branches.begin(), combo.branches.end());
  }
  return hit;
}

CoverageSnapshot SyntheticOracle::snapshot_of(const std::set<size_t>& hit) const {
  CoverageSnapshot snap;
  const size_t n = cfg_.universe;
  for (size_t b = 0; b < n; ++b) {
    auto& file = snap.files[kSyntheticFiles[b * 4 / n]];
    const bool covered = hit.count(b) > 0;
    const int line = static_cast<int>(b) + 1;
    file.lines[line] = covered;
    file.branches[BranchId{line, "0", "0"}] = covered;
    auto& fn = file.functions["fn_" + std::to_string(b / 8)];
    fn.line = static_cast<int>(b / 8) * 8 + 1;
    fn.covered = fn.covered || covered;
  }
  return snap;
}

CoverageSnapshot SyntheticOracle::evaluate(const TestCase& tc) const {
  if (tc.statements.empty()) return snapshot_of({});
  return snapshot_of(branches_for(case_features(tc)));
}

}  // namespace mist
