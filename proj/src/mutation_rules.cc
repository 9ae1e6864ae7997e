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

#include "mist/mutation_rules.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>

#include "mist/error.h"
#include "mist/json_util.h"

namespace mist {

const char* to_string(RuleCategory category) {
  switch (category) {
    case RuleCategory::kDDL:
      return "DDL";
    case RuleCategory::kDML:
      return "DML";
    case RuleCategory::kDQL:
      return "DQL";
  }
  return "?";
}

RuleCategory rule_category_from_string(std::string_view text) {
  if (text == "DDL" || text == "ddl") return RuleCategory::kDDL;
  if (text == "DML" || text == "dml") return RuleCategory::kDML;
  if (text == "DQL" || text == "dql") return RuleCategory::kDQL;
  throw ConfigError("unknown rule category '" + std::string(text) + "'");
}

std::string noop_rule_id(RuleCategory category) {
  switch (category) {
    case RuleCategory::kDDL:
      return "ddl.noop";
    case RuleCategory::kDML:
      return "dml.noop";
    case RuleCategory::kDQL:
      return "dql.noop";
  }
  return "noop";
}

struct RuleSubject {
  const TestCase* tc = nullptr;
  CaseSchema schema;
  std::vector<std::optional<SelectShape>> shapes;
  std::vector<StatementTargets> targets;

  const std::vector<ClassifiedStatement>& stmts() const { return tc->statements; }
  const ClassifiedStatement& at(size_t i) const { return tc->statements[i]; }
  size_t size() const { return tc->statements.size(); }
  std::vector<std::string> texts() const { return tc->statement_texts(); }
};

namespace {

RuleSubject make_subject(const TestCase& tc) {
  RuleSubject subj;
  subj.tc = &tc;
  subj.schema = extract_schema(tc.statements);
  for (const auto& s : tc.statements) {
    subj.shapes.push_back(analyze_select(s));
    subj.targets.push_back(locate_targets(s));
  }
  return subj;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
  return items[rng.below(items.size())];
}

template <typename T, size_t N>
const T& pick(Rng& rng, const std::array<T, N>& items) {
  return items[rng.below(N)];
}

// ---------------------------------------------------------------------------
// Text surgery on token streams.

size_t offset_of(const ClassifiedStatement& s, size_t i) {
  return i < s.tokens.size() ? s.tokens[i].offset : s.text.size();
}

std::string splice(const ClassifiedStatement& s, size_t begin, size_t end, std::string_view repl) {
  return s.text.substr(0, offset_of(s, begin)) + std::string(repl) +
         s.text.substr(offset_of(s, end));
}

// Inserts " text" directly after the last significant token before `before`.
std::string insert_before(const ClassifiedStatement& s, size_t before, std::string_view text) {
  size_t p = before;
  while (p > 0 && !s.significant(p - 1)) --p;
  return splice(s, p, p, " " + std::string(text));
}

// Statement text without its terminating semicolon or comments.
std::string body(const ClassifiedStatement& s) {
  size_t last = s.tokens.size();
  while (last > 0 && (!s.significant(last - 1) || s.token_text(last - 1) == ";")) --last;
  std::string out;
  for (size_t i = 0; i < last; ++i) {
    out += s.tokens[i].kind == TokenKind::kComment ? std::string(" ")
                                                   : std::string(s.token_text(i));
  }
  const size_t first = out.find_first_not_of(" \t\r\n");
  return first == std::string::npos ? std::string() : out.substr(first);
}

TokenRange trim_range(const ClassifiedStatement& s, TokenRange r) {
  while (r.begin < r.end && !s.significant(r.begin)) ++r.begin;
  while (r.end > r.begin && !s.significant(r.end - 1)) --r.end;
  return r;
}

std::string range_text(const ClassifiedStatement& s, TokenRange r) {
  return s.text.substr(offset_of(s, r.begin), offset_of(s, r.end) - offset_of(s, r.begin));
}

std::vector<size_t> sig_in(const ClassifiedStatement& s, TokenRange r) {
  std::vector<size_t> out;
  for (size_t i = r.begin; i < r.end; ++i) {
    if (s.significant(i)) out.push_back(i);
  }
  return out;
}

bool simple_identifier(std::string_view name) {
  if (name.empty() || !(std::islower(static_cast<unsigned char>(name[0])) || name[0] == '_')) {
    return false;
  }
  for (char c : name) {
    const auto u = static_cast<unsigned char>(c);
    if (!(std::islower(u) || std::isdigit(u) || c == '_')) return false;
  }
  return !is_sql_keyword(name);
}

std::string quote_ident(const std::string& name) {
  if (simple_identifier(name)) return name;
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// A table or column name absent from every statement of the case.
std::string fresh_name(const RuleSubject& subj, const std::string& prefix) {
  std::string all;
  for (const auto& s : subj.stmts()) {
    for (char c : s.text) all += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  for (int n = 1;; ++n) {
    std::string name = prefix + std::to_string(n);
    if (all.find(name) == std::string::npos) return name;
  }
}

bool first_word(const ClassifiedStatement& s, std::string_view word) {
  const auto sig = s.significant_tokens();
  return !sig.empty() && s.is_word(sig[0], word);
}

// ---------------------------------------------------------------------------
// Schema views.

std::string created_table_name(const ClassifiedStatement& s) {
  const auto sig = s.significant_tokens();
  size_t k = 0;
  if (k >= sig.size() || !s.is_word(sig[k], "CREATE")) return {};
  ++k;
  while (k < sig.size() && (s.is_word(sig[k], "TEMP") || s.is_word(sig[k], "TEMPORARY"))) ++k;
  if (k >= sig.size() || !s.is_word(sig[k], "TABLE")) return {};
  ++k;
  if (k + 2 < sig.size() && s.is_word(sig[k], "IF") && s.is_word(sig[k + 1], "NOT") &&
      s.is_word(sig[k + 2], "EXISTS")) {
    k += 3;
  }
  if (k + 1 < sig.size() && s.token_text(sig[k + 1]) == ".") return {};
  return k < sig.size() ? normalize_identifier(s.token_text(sig[k])) : std::string();
}

std::string dropped_table_name(const ClassifiedStatement& s) {
  const auto sig = s.significant_tokens();
  if (sig.size() < 3 || !s.is_word(sig[0], "DROP") || !s.is_word(sig[1], "TABLE")) return {};
  size_t k = 2;
  if (k + 1 < sig.size() && s.is_word(sig[k], "IF") && s.is_word(sig[k + 1], "EXISTS")) k += 2;
  return k < sig.size() ? normalize_identifier(s.token_text(sig[k])) : std::string();
}

// Table named by "ALTER TABLE <name> ...", and whether it renames.
std::string altered_table_name(const ClassifiedStatement& s, bool* renames) {
  const auto sig = s.significant_tokens();
  if (sig.size() < 4 || !s.is_word(sig[0], "ALTER") || !s.is_word(sig[1], "TABLE")) return {};
  *renames = s.is_word(sig[3], "RENAME") && sig.size() > 4 && s.is_word(sig[4], "TO");
  return normalize_identifier(s.token_text(sig[2]));
}

// Tables that exist, with known columns, when statement `idx` runs.
std::vector<TableInfo> visible_tables(const RuleSubject& subj, size_t idx) {
  std::vector<ClassifiedStatement> prefix(subj.stmts().begin(),
                                          subj.stmts().begin() + static_cast<long>(idx));
  CaseSchema schema = extract_schema(prefix);
  std::vector<TableInfo> out;
  for (auto& t : schema.tables) {
    if (t.columns.empty()) continue;
    bool dropped = false;
    for (size_t i = t.create_statement + 1; i < idx; ++i) {
      dropped = dropped || dropped_table_name(subj.at(i)) == t.name;
    }
    if (!dropped) out.push_back(std::move(t));
  }
  return out;
}

struct TableSite {
  TableInfo info;
  size_t ddl_end = 0;  // first index after the statements defining the table
  size_t dml_end = 0;  // first index after those and every DML writing it
};

// Tables created once, never renamed or dropped: safe anchors for new DDL.
std::vector<TableSite> stable_tables(const RuleSubject& subj) {
  std::vector<TableSite> out;
  for (const auto& t : subj.schema.tables) {
    if (t.columns.empty()) continue;
    if (created_table_name(subj.at(t.create_statement)) != t.name) continue;
    TableSite site{t, t.create_statement + 1, t.create_statement + 1};
    bool stable = true;
    for (size_t i = 0; i < subj.size() && stable; ++i) {
      const auto& s = subj.at(i);
      bool renames = false;
      if (dropped_table_name(s) == t.name) stable = false;
      if (altered_table_name(s, &renames) == t.name) {
        if (renames) stable = false;
        site.ddl_end = std::max(site.ddl_end, i + 1);
      }
      if (s.kind == StatementKind::kDML && dml_target_table(s) == t.name) {
        site.dml_end = std::max(site.dml_end, i + 1);
      }
    }
    site.dml_end = std::max(site.dml_end, site.ddl_end);
    if (stable) out.push_back(std::move(site));
  }
  return out;
}

struct ColumnTraits {
  bool primary = false;
  bool unique = false;
  bool generated = false;
  bool checked = false;
};

// Constraint flags for the columns of `table`, from its CREATE statement and
// any later ALTER TABLE ADD COLUMN.
std::map<std::string, ColumnTraits> column_traits(const RuleSubject& subj, const TableInfo& table) {
  std::map<std::string, ColumnTraits> out;
  auto scan_def = [&](const ClassifiedStatement& s, TokenRange def) {
    const auto sig = sig_in(s, def);
    if (sig.empty()) return;
    if (s.is_word(sig[0], "PRIMARY") || s.is_word(sig[0], "UNIQUE")) {
      const bool primary = s.is_word(sig[0], "PRIMARY");
      for (size_t k = 1; k < sig.size(); ++k) {
        if (s.tokens[sig[k]].kind != TokenKind::kIdentifier) continue;
        auto& tr = out[normalize_identifier(s.token_text(sig[k]))];
        (primary ? tr.primary : tr.unique) = true;
      }
      return;
    }
    if (s.is_word(sig[0], "CONSTRAINT") || s.is_word(sig[0], "CHECK") ||
        s.is_word(sig[0], "FOREIGN")) {
      return;
    }
    auto& tr = out[normalize_identifier(s.token_text(sig[0]))];
    for (size_t k = 1; k < sig.size(); ++k) {
      if (s.is_word(sig[k], "PRIMARY")) tr.primary = true;
      if (s.is_word(sig[k], "UNIQUE")) tr.unique = true;
      if (s.is_word(sig[k], "GENERATED") ||
          (s.is_word(sig[k], "AS") && k + 1 < sig.size() && s.token_text(sig[k + 1]) == "(")) {
        tr.generated = true;
      }
      if (s.is_word(sig[k], "CHECK") || s.is_word(sig[k], "REFERENCES") ||
          s.is_word(sig[k], "COLLATE")) {
        tr.checked = true;
      }
    }
  };
  const auto& create = subj.at(table.create_statement);
  const auto& cols = subj.targets[table.create_statement].column_lists;
  for (const auto& r : cols) {
    if (create.token_text(r.begin) != "(") continue;
    for (auto def : split_top_level(create, {r.begin + 1, r.end - 1})) scan_def(create, def);
    break;
  }
  for (size_t i = table.create_statement + 1; i < subj.size(); ++i) {
    const auto& s = subj.at(i);
    bool renames = false;
    if (altered_table_name(s, &renames) != table.name || renames) continue;
    const auto sig = s.significant_tokens();
    size_t k = 3;
    if (k < sig.size() && s.is_word(sig[k], "ADD")) {
      ++k;
      if (k < sig.size() && s.is_word(sig[k], "COLUMN")) ++k;
      if (k < sig.size()) scan_def(s, {sig[k], sig.back()});
    }
  }
  return out;
}

// Columns whose values can be rewritten without tripping a constraint.
std::vector<ColumnInfo> free_columns(const RuleSubject& subj, const TableInfo& table) {
  const auto traits = column_traits(subj, table);
  std::vector<ColumnInfo> out;
  for (const auto& c : table.columns) {
    auto it = traits.find(c.name);
    if (it != traits.end() &&
        (it->second.primary || it->second.unique || it->second.generated || it->second.checked)) {
      continue;
    }
    out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Query sites.

std::vector<size_t> dql_statements(const RuleSubject& subj) {
  std::vector<size_t> out;
  for (size_t i = 0; i < subj.size(); ++i) {
    if (subj.at(i).kind == StatementKind::kDQL) out.push_back(i);
  }
  return out;
}

// SELECT-led DQL statements; compound ones only when `allow_compound`.
std::vector<size_t> select_statements(const RuleSubject& subj, bool allow_compound) {
  std::vector<size_t> out;
  for (size_t i = 0; i < subj.size(); ++i) {
    const auto& shape = subj.shapes[i];
    if (subj.at(i).kind != StatementKind::kDQL || !shape) continue;
    if (shape->compound && !allow_compound) continue;
    if (shape->projection.end <= shape->projection.begin) continue;
    out.push_back(i);
  }
  return out;
}

bool is_parameter(std::string_view t) {
  return !t.empty() && (t[0] == '?' || t[0] == ':' || t[0] == '@' || t[0] == '$');
}

// Column expressions usable anywhere in a simple SELECT: plain projected
// columns plus the columns of its first FROM table.
std::vector<std::string> site_columns(const RuleSubject& subj, size_t idx) {
  const auto& s = subj.at(idx);
  const auto& shape = *subj.shapes[idx];
  std::vector<std::string> out;
  auto add = [&](std::string c) {
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(std::move(c));
  };
  for (auto item : split_top_level(s, shape.projection)) {
    const auto sig = sig_in(s, item);
    auto ident = [&](size_t k) {
      return s.tokens[sig[k]].kind == TokenKind::kIdentifier && !is_parameter(s.token_text(sig[k]));
    };
    if (sig.size() == 1 && ident(0)) add(std::string(s.token_text(sig[0])));
    if (sig.size() == 3 && ident(0) && s.token_text(sig[1]) == "." && ident(2)) {
      add(range_text(s, {sig[0], sig[2] + 1}));
    }
  }
  if (!shape.from_table.empty() && !shape.from_ref.empty()) {
    for (const auto& t : visible_tables(subj, idx)) {
      if (t.name != shape.from_table) continue;
      for (const auto& c : t.columns) add(shape.from_ref + "." + quote_ident(c.name));
    }
  }
  return out;
}

// Adds `pred` as a conjunct of the WHERE clause, creating it if needed.
std::string add_predicate(const ClassifiedStatement& s, const SelectShape& shape,
                          const std::string& pred) {
  if (shape.where_kw) return splice(s, *shape.where_kw + 1, *shape.where_kw + 1, " " + pred + " AND");
  return insert_before(s, shape.insertion_point(0), "WHERE " + pred);
}

std::string add_projection(const ClassifiedStatement& s, const SelectShape& shape,
                           const std::string& expr) {
  return splice(s, shape.projection.end, shape.projection.end, ", " + expr);
}

RuleEdit replace_statement(const RuleSubject& subj, size_t idx, std::string text) {
  RuleEdit e{subj.texts(), {idx}};
  e.statements[idx] = std::move(text);
  return e;
}

RuleEdit insert_statements(const RuleSubject& subj, size_t at, std::vector<std::string> added) {
  RuleEdit e{subj.texts(), {}};
  for (size_t k = 0; k < added.size(); ++k) {
    e.statements.insert(e.statements.begin() + static_cast<long>(at + k), added[k]);
    e.changed.push_back(at + k);
  }
  return e;
}

bool any_table_visible(const RuleSubject& subj, size_t idx) {
  return !visible_tables(subj, idx).empty();
}

// Simple SELECT sites that know at least one column.
std::vector<size_t> column_sites(const RuleSubject& subj) {
  std::vector<size_t> out;
  for (size_t i : select_statements(subj, false)) {
    if (!site_columns(subj, i).empty()) out.push_back(i);
  }
  return out;
}

std::vector<size_t> table_query_sites(const RuleSubject& subj) {
  std::vector<size_t> out;
  for (size_t i : select_statements(subj, false)) {
    if (any_table_visible(subj, i)) out.push_back(i);
  }
  return out;
}

std::pair<TableInfo, ColumnInfo> pick_table_column(Rng& rng, const std::vector<TableInfo>& tables) {
  const auto& t = pick(rng, tables);
  return {t, pick(rng, t.columns)};
}

// Predicate rules share one shape: pick a column site, build a predicate.
RuleEdit predicate_on_column(const RuleSubject& subj, Rng& rng,
                             const std::function<std::string(const std::string&, Rng&)>& make) {
  const size_t idx = pick(rng, column_sites(subj));
  const std::string col = pick(rng, site_columns(subj, idx));
  return replace_statement(subj, idx, add_predicate(subj.at(idx), *subj.shapes[idx], make(col, rng)));
}

RuleEdit projection_on_site(const RuleSubject& subj, Rng& rng,
                            const std::function<std::string(const std::vector<std::string>&, Rng&)>& make) {
  const size_t idx = pick(rng, select_statements(subj, false));
  const auto cols = site_columns(subj, idx);
  return replace_statement(subj, idx, add_projection(subj.at(idx), *subj.shapes[idx], make(cols, rng)));
}

std::string random_word(Rng& rng) {
  static constexpr std::array<const char*, 8> kWords = {"alpha", "beta", "gamma", "delta",
                                                        "omega", "kappa", "sigma", "zeta"};
  return pick(rng, kWords);
}

// ---------------------------------------------------------------------------
// DDL rules.

bool has_stable_table(const RuleSubject& subj) { return !stable_tables(subj).empty(); }

RuleEdit ddl_add_column_exotic_type(const RuleSubject& subj, Rng& rng) {
  static constexpr std::array<const char*, 9> kTypes = {
      "BLOB",          "NUMERIC(10, 5)",  "VARCHAR(3)",       "DATETIME",   "BOOLEAN",
      "DECIMAL(38, 0)", "UNSIGNED BIG INT", "NVARCHAR(100)", "DOUBLE PRECISION"};
  const auto site = pick(rng, stable_tables(subj));
  const std::string col = fresh_name(subj, "mist_c");
  return insert_statements(subj, site.dml_end,
                           {"ALTER TABLE " + quote_ident(site.info.name) + " ADD COLUMN " + col +
                            " " + pick(rng, kTypes) + ";"});
}

RuleEdit ddl_add_not_null_default(const RuleSubject& subj, Rng& rng) {
  const auto site = pick(rng, stable_tables(subj));
  const std::string col = fresh_name(subj, "mist_c");
  std::string def;
  switch (rng.below(3)) {
    case 0:
      def = "INTEGER NOT NULL DEFAULT " + std::to_string(rng.range(-100, 100));
      break;
    case 1:
      def = "TEXT NOT NULL DEFAULT '" + random_word(rng) + "'";
      break;
    default:
      def = "REAL DEFAULT 0.5";
      break;
  }
  return insert_statements(subj, site.dml_end,
                           {"ALTER TABLE " + quote_ident(site.info.name) + " ADD COLUMN " + col +
                            " " + def + ";"});
}

RuleEdit ddl_create_index(const RuleSubject& subj, Rng& rng) {
  const auto site = pick(rng, stable_tables(subj));
  const auto& cols = site.info.columns;
  const std::string name = fresh_name(subj, "mist_idx");
  const std::string table = quote_ident(site.info.name);
  const std::string c1 = quote_ident(pick(rng, cols).name);
  std::string stmt;
  const uint64_t variant = rng.below(3);
  if (variant == 1 && cols.size() >= 2) {
    std::string c2 = c1;
    while (c2 == c1) c2 = quote_ident(pick(rng, cols).name);
    stmt = "CREATE INDEX " + name + " ON " + table + " (" + c1 + ", " + c2 + " DESC);";
  } else if (variant == 2) {
    stmt = "CREATE INDEX " + name + " ON " + table + " (" + c1 + ") WHERE " + c1 + " IS NOT NULL;";
  } else {
    stmt = "CREATE INDEX " + name + " ON " + table + " (" + c1 + ");";
  }
  return insert_statements(subj, site.ddl_end, {stmt});
}

RuleEdit ddl_create_view(const RuleSubject& subj, Rng& rng) {
  const size_t idx = pick(rng, dql_statements(subj));
  const std::string name = fresh_name(subj, "mist_v");
  return insert_statements(subj, idx + 1,
                           {"CREATE TEMP VIEW " + name + " AS " + body(subj.at(idx)) + ";",
                            "SELECT * FROM " + name + ";"});
}

// CREATE TABLE statements with a column list, by table site.
std::vector<TableSite> creatable_sites(const RuleSubject& subj) {
  std::vector<TableSite> out;
  for (auto& site : stable_tables(subj)) {
    const auto& cl = subj.targets[site.info.create_statement].column_lists;
    if (!cl.empty() && subj.at(site.info.create_statement).token_text(cl.front().begin) == "(") {
      out.push_back(std::move(site));
    }
  }
  return out;
}

// Appends a table constraint to the CREATE TABLE column list.
std::string append_table_constraint(const RuleSubject& subj, const TableSite& site,
                                    const std::string& constraint) {
  const auto& s = subj.at(site.info.create_statement);
  const auto& list = subj.targets[site.info.create_statement].column_lists.front();
  return splice(s, list.end - 1, list.end - 1, ", " + constraint);
}

// Columns declared in the CREATE TABLE statement itself.
std::vector<ColumnInfo> declared_columns(const RuleSubject& subj, const TableSite& site) {
  return extract_schema({subj.at(site.info.create_statement)}).tables.front().columns;
}

RuleEdit ddl_add_check(const RuleSubject& subj, Rng& rng) {
  const auto site = pick(rng, creatable_sites(subj));
  const std::string col = quote_ident(pick(rng, declared_columns(subj, site)).name);
  std::string check;
  if (rng.chance(0.5)) {
    check = "CHECK (typeof(" + col + ") IN ('null', 'integer', 'real', 'text', 'blob'))";
  } else {
    check = "CHECK (coalesce(length(" + col + "), 0) >= 0)";
  }
  return replace_statement(subj, site.info.create_statement,
                           append_table_constraint(subj, site, check));
}

RuleEdit ddl_add_unique(const RuleSubject& subj, Rng& rng) {
  const auto site = pick(rng, creatable_sites(subj));
  const auto cols = declared_columns(subj, site);
  const auto traits = column_traits(subj, site.info);
  // A superset of a key is unique for any data the original accepted.
  std::string key;
  for (const auto& c : cols) {
    auto it = traits.find(c.name);
    if (it != traits.end() && (it->second.primary || it->second.unique)) key = c.name;
  }
  std::vector<std::string> parts;
  if (!key.empty()) {
    parts.push_back(quote_ident(key));
    const auto& other = pick(rng, cols);
    if (other.name != key) parts.push_back(quote_ident(other.name));
  } else {
    for (const auto& c : cols) parts.push_back(quote_ident(c.name));
  }
  std::string list;
  for (size_t k = 0; k < parts.size(); ++k) list += (k ? ", " : "") + parts[k];
  return replace_statement(subj, site.info.create_statement,
                           append_table_constraint(subj, site, "UNIQUE (" + list + ")"));
}

RuleEdit ddl_rename_table(const RuleSubject& subj, Rng& rng) {
  const auto site = pick(rng, stable_tables(subj));
  const std::string fresh = fresh_name(subj, "mist_t");
  RuleEdit e{subj.texts(), {}};
  const size_t at = site.info.create_statement + 1;
  for (size_t i = at; i < subj.size(); ++i) {
    const auto& s = subj.at(i);
    std::string out;
    bool touched = false;
    for (size_t t = 0; t < s.tokens.size(); ++t) {
      if (s.tokens[t].kind == TokenKind::kIdentifier &&
          normalize_identifier(s.token_text(t)) == site.info.name) {
        out += fresh;
        touched = true;
      } else {
        out += s.token_text(t);
      }
    }
    if (touched) {
      e.statements[i] = out;
      e.changed.push_back(i + 1);
    }
  }
  e.statements.insert(e.statements.begin() + static_cast<long>(at),
                      "ALTER TABLE " + quote_ident(site.info.name) + " RENAME TO " + fresh + ";");
  e.changed.insert(e.changed.begin(), at);
  return e;
}

RuleEdit ddl_create_trigger(const RuleSubject& subj, Rng& rng) {
  const auto site = pick(rng, stable_tables(subj));
  const std::string table = quote_ident(site.info.name);
  const std::string col = quote_ident(pick(rng, site.info.columns).name);
  const std::string name = fresh_name(subj, "mist_trg");
  std::string stmt;
  switch (rng.below(3)) {
    case 0:
      stmt = "CREATE TRIGGER " + name + " AFTER INSERT ON " + table + " BEGIN SELECT NEW." + col +
             "; END;";
      break;
    case 1:
      stmt = "CREATE TRIGGER " + name + " AFTER UPDATE ON " + table + " WHEN OLD." + col +
             " IS NOT NEW." + col + " BEGIN SELECT OLD." + col + ", NEW." + col + "; END;";
      break;
    default:
      stmt = "CREATE TRIGGER " + name + " BEFORE DELETE ON " + table +
             " BEGIN SELECT count(*) FROM " + table + "; END;";
      break;
  }
  return insert_statements(subj, site.ddl_end, {stmt});
}

RuleEdit ddl_recreate_without_rowid(const RuleSubject& subj, Rng& rng) {
  std::vector<TableSite> sites;
  for (auto& s : creatable_sites(subj)) {
    if (!s.info.without_rowid) sites.push_back(std::move(s));
  }
  const auto site = pick(rng, sites);
  const auto& s = subj.at(site.info.create_statement);
  const auto& list = subj.targets[site.info.create_statement].column_lists.front();
  std::string cols;
  for (size_t t = list.begin + 1; t + 1 < list.end; ++t) {
    if (s.is_word(t, "AUTOINCREMENT")) continue;
    cols += s.tokens[t].kind == TokenKind::kComment ? std::string(" ") : std::string(s.token_text(t));
  }
  if (!site.info.has_primary_key) {
    cols += ", PRIMARY KEY (" + quote_ident(site.info.columns.front().name) + ")";
  }
  const std::string table = quote_ident(site.info.name);
  return insert_statements(subj, site.info.create_statement + 1,
                           {"DROP TABLE " + table + ";",
                            "CREATE TABLE " + table + " (" + cols + ") WITHOUT ROWID;"});
}

RuleEdit ddl_add_generated_column(const RuleSubject& subj, Rng& rng) {
  const auto site = pick(rng, stable_tables(subj));
  const auto& col = pick(rng, site.info.columns);
  const std::string c = quote_ident(col.name);
  std::string expr;
  if (col.numeric()) {
    expr = rng.chance(0.5) ? c + " * 2" : "abs(" + c + ") + 1";
  } else if (col.textual()) {
    expr = rng.chance(0.5) ? "upper(" + c + ")" : "length(" + c + ")";
  } else {
    expr = "coalesce(" + c + ", 0)";
  }
  const std::string name = fresh_name(subj, "mist_g");
  return insert_statements(subj, site.ddl_end,
                           {"ALTER TABLE " + quote_ident(site.info.name) + " ADD COLUMN " + name +
                            " GENERATED ALWAYS AS (" + expr + ") VIRTUAL;"});
}

// ---------------------------------------------------------------------------
// DML rules.

struct ValueSite {
  size_t stmt;
  TokenRange tuple;
  TokenRange value;  // trimmed
};

std::vector<ValueSite> value_sites(const RuleSubject& subj) {
  std::vector<ValueSite> out;
  for (size_t i = 0; i < subj.size(); ++i) {
    const auto& s = subj.at(i);
    if (s.kind != StatementKind::kDML) continue;
    for (const auto& tuple : subj.targets[i].value_tuples) {
      for (auto v : split_top_level(s, {tuple.begin + 1, tuple.end - 1})) {
        v = trim_range(s, v);
        if (v.end > v.begin) out.push_back({i, tuple, v});
      }
    }
  }
  return out;
}

std::vector<std::pair<size_t, TokenRange>> dml_tokens(
    const RuleSubject& subj, std::vector<TokenRange> StatementTargets::*member) {
  std::vector<std::pair<size_t, TokenRange>> out;
  for (size_t i = 0; i < subj.size(); ++i) {
    if (subj.at(i).kind != StatementKind::kDML) continue;
    for (const auto& r : subj.targets[i].*member) out.emplace_back(i, r);
  }
  return out;
}

RuleEdit replace_value(const RuleSubject& subj, const ValueSite& site, const std::string& text) {
  return replace_statement(subj, site.stmt, splice(subj.at(site.stmt), site.value.begin, site.value.end, text));
}

RuleEdit dml_boundary_value_insert(const RuleSubject& subj, Rng& rng) {
  static const std::array<std::string, 8> kBoundary = {
      "NULL", "0", "-1", "9223372036854775807", "-9223372036854775808", "1e308", "''",
      "'" + std::string(512, 'm') + "'"};
  const auto site = pick(rng, value_sites(subj));
  const std::string current = range_text(subj.at(site.stmt), site.value);
  std::vector<std::string> pool;
  for (const auto& b : kBoundary) {
    if (b != current) pool.push_back(b);
  }
  return replace_value(subj, site, pick(rng, pool));
}

RuleEdit dml_null_injection(const RuleSubject& subj, Rng& rng) {
  std::vector<std::pair<size_t, size_t>> tuples;  // (statement, arity)
  for (const auto& v : value_sites(subj)) {
    if (!first_word(subj.at(v.stmt), "INSERT")) continue;
    const size_t arity = split_top_level(subj.at(v.stmt), {v.tuple.begin + 1, v.tuple.end - 1}).size();
    if (tuples.empty() || tuples.back().first != v.stmt) tuples.emplace_back(v.stmt, arity);
  }
  const auto [idx, arity] = pick(rng, tuples);
  const auto& s = subj.at(idx);
  // Keep the original column list and target; only the row changes.
  const auto sig = s.significant_tokens();
  size_t values_kw = 0;
  for (size_t k = 0; k < sig.size(); ++k) {
    if (s.is_word(sig[k], "VALUES")) {
      values_kw = sig[k];
      break;
    }
  }
  std::string row = "(";
  for (size_t k = 0; k < arity; ++k) row += k ? ", NULL" : "NULL";
  row += ")";
  std::string head = s.text.substr(0, offset_of(s, values_kw));
  std::string stmt = head + "VALUES " + row + ";";
  // Upsert or RETURNING tails stay off: the NULL row stands alone.
  return insert_statements(subj, idx + 1, {stmt});
}

std::vector<size_t> null_injection_sites(const RuleSubject& subj) {
  std::vector<size_t> out;
  for (const auto& v : value_sites(subj)) {
    if (first_word(subj.at(v.stmt), "INSERT")) out.push_back(v.stmt);
  }
  return out;
}

RuleEdit dml_bulk_insert(const RuleSubject& subj, Rng& rng) {
  std::vector<std::pair<size_t, TokenRange>> tuples;
  for (size_t i = 0; i < subj.size(); ++i) {
    const auto& s = subj.at(i);
    if (s.kind != StatementKind::kDML || !first_word(s, "INSERT")) continue;
    for (const auto& t : subj.targets[i].value_tuples) tuples.emplace_back(i, t);
  }
  const auto [idx, tuple] = pick(rng, tuples);
  const auto& s = subj.at(idx);
  const TokenRange last = subj.targets[idx].value_tuples.back();
  std::string rows;
  const int copies = static_cast<int>(rng.range(2, 4));
  for (int c = 0; c < copies; ++c) {
    std::string row;
    for (size_t t = tuple.begin; t < tuple.end; ++t) {
      const auto kind = s.tokens[t].kind;
      if (kind == TokenKind::kNumber) {
        row += std::to_string(rng.range(1000, 1000000000));
      } else if (kind == TokenKind::kString) {
        row += "'" + random_word(rng) + "_" + std::to_string(rng.below(1000)) + "'";
      } else {
        row += s.token_text(t);
      }
    }
    rows += ", " + row;
  }
  return replace_statement(subj, idx, splice(s, last.end, last.end, rows));
}

std::vector<size_t> bulk_sites(const RuleSubject& subj) {
  std::vector<size_t> out;
  for (size_t i = 0; i < subj.size(); ++i) {
    const auto& s = subj.at(i);
    if (s.kind == StatementKind::kDML && first_word(s, "INSERT") &&
        !subj.targets[i].value_tuples.empty()) {
      out.push_back(i);
    }
  }
  return out;
}

RuleEdit dml_update_expression(const RuleSubject& subj, Rng& rng) {
  const auto site = pick(rng, stable_tables(subj));
  auto cols = free_columns(subj, site.info);
  const std::string table = quote_ident(site.info.name);
  std::string set;
  if (cols.empty()) {
    const std::string c = quote_ident(site.info.columns.front().name);
    set = c + " = " + c;
  } else {
    const auto& col = pick(rng, cols);
    const std::string c = quote_ident(col.name);
    if (col.numeric()) {
      set = c + " = " + (rng.chance(0.5) ? c + " + 1" : "abs(" + c + ") * 2");
    } else if (col.textual()) {
      set = c + " = " + (rng.chance(0.5) ? c + " || '_m'" : "upper(" + c + ")");
    } else {
      set = c + " = coalesce(" + c + ", NULL)";
    }
  }
  const std::string where = quote_ident(pick(rng, site.info.columns).name) + " IS NOT NULL";
  return insert_statements(subj, site.dml_end,
                           {"UPDATE " + table + " SET " + set + " WHERE " + where + ";"});
}

RuleEdit dml_delete_predicate(const RuleSubject& subj, Rng& rng) {
  const auto site = pick(rng, stable_tables(subj));
  const std::string table = quote_ident(site.info.name);
  const std::string c = quote_ident(pick(rng, site.info.columns).name);
  std::string pred;
  switch (rng.below(3)) {
    case 0:
      pred = c + " IS NULL";
      break;
    case 1:
      pred = c + " < " + std::to_string(rng.range(-5, 2));
      break;
    default:
      pred = c + " IN (SELECT " + c + " FROM " + table + " ORDER BY " + c + " LIMIT 1)";
      break;
  }
  return insert_statements(subj, site.dml_end, {"DELETE FROM " + table + " WHERE " + pred + ";"});
}

std::vector<size_t> plain_insert_sites(const RuleSubject& subj) {
  std::vector<size_t> out;
  for (size_t i = 0; i < subj.size(); ++i) {
    const auto& s = subj.at(i);
    const auto sig = s.significant_tokens();
    if (s.kind == StatementKind::kDML && sig.size() > 2 && s.is_word(sig[0], "INSERT") &&
        s.is_word(sig[1], "INTO")) {
      out.push_back(i);
    }
  }
  return out;
}

RuleEdit dml_insert_or_replace(const RuleSubject& subj, Rng& rng) {
  const size_t idx = pick(rng, plain_insert_sites(subj));
  const auto& s = subj.at(idx);
  const size_t kw = s.significant_tokens()[0];
  return replace_statement(subj, idx, splice(s, kw, kw + 1, "INSERT OR REPLACE"));
}

RuleEdit dml_extreme_numeric(const RuleSubject& subj, Rng& rng) {
  static constexpr std::array<const char*, 7> kExtreme = {
      "9223372036854775807", "(-9223372036854775808)", "1.7976931348623157e308",
      "(-1e-308)",           "4.9e-324",               "0x7FFFFFFFFFFFFFFF",
      "(-0.0)"};
  const auto [idx, r] = pick(rng, dml_tokens(subj, &StatementTargets::numeric_literals));
  const auto& s = subj.at(idx);
  std::string repl = pick(rng, kExtreme);
  if (repl == s.token_text(r.begin)) repl = "9223372036854775807";
  return replace_statement(subj, idx, splice(s, r.begin, r.end, repl));
}

RuleEdit dml_unicode_long_string(const RuleSubject& subj, Rng& rng) {
  std::string repeated;
  for (int k = 0; k < 64; ++k) repeated += "\xc3\xa9\xe6\x97\xa5";
  const std::array<std::string, 5> kStrings = {
      "'h\xc3\xa9llo w\xc3\xb6rld \xe2\x9c\x93'", "'\xe6\x97\xa5\xe6\x9c\xac\xe8\xaa\x9e'",
      "'\xf0\x9f\x98\x80\xf0\x9f\x8e\x89'", "'" + std::string(2048, 'z') + "'", "'" + repeated + "'"};
  const auto [idx, r] = pick(rng, dml_tokens(subj, &StatementTargets::string_literals));
  return replace_statement(subj, idx, splice(subj.at(idx), r.begin, r.end, pick(rng, kStrings)));
}

RuleEdit dml_type_mismatch_literal(const RuleSubject& subj, Rng& rng) {
  const auto site = pick(rng, value_sites(subj));
  const auto& s = subj.at(site.stmt);
  const auto kind = s.tokens[site.value.begin].kind;
  std::string repl;
  if (kind == TokenKind::kNumber || s.token_text(site.value.begin) == "-") {
    repl = rng.chance(0.5) ? "'not_a_number'" : "X'DEADBEEF'";
  } else if (kind == TokenKind::kString) {
    repl = rng.chance(0.5) ? "12345" : "3.25";
  } else {
    repl = "'mist'";
  }
  return replace_value(subj, site, repl);
}

// DML statements not already inside an explicit transaction.
std::vector<size_t> transaction_free_dml(const RuleSubject& subj) {
  std::vector<size_t> out;
  bool open = false;
  for (size_t i = 0; i < subj.size(); ++i) {
    const auto& s = subj.at(i);
    if (first_word(s, "BEGIN") || first_word(s, "SAVEPOINT")) open = true;
    if (first_word(s, "COMMIT") || first_word(s, "END") || first_word(s, "ROLLBACK")) {
      open = false;
    }
    if (!open && s.kind == StatementKind::kDML) out.push_back(i);
  }
  return out;
}

RuleEdit dml_transaction_wrap(const RuleSubject& subj, Rng& rng) {
  const size_t idx = pick(rng, transaction_free_dml(subj));
  RuleEdit e{subj.texts(), {idx, idx + 2}};
  e.statements.insert(e.statements.begin() + static_cast<long>(idx) + 1,
                      rng.chance(0.5) ? "COMMIT;" : "COMMIT TRANSACTION;");
  e.statements.insert(e.statements.begin() + static_cast<long>(idx),
                      rng.chance(0.5) ? "BEGIN;" : "BEGIN IMMEDIATE;");
  return e;
}

// ---------------------------------------------------------------------------
// DQL rules.

std::vector<std::pair<size_t, TokenRange>> dql_tokens(
    const RuleSubject& subj, std::vector<TokenRange> StatementTargets::*member) {
  std::vector<std::pair<size_t, TokenRange>> out;
  for (size_t i = 0; i < subj.size(); ++i) {
    if (subj.at(i).kind != StatementKind::kDQL) continue;
    for (const auto& r : subj.targets[i].*member) out.emplace_back(i, r);
  }
  return out;
}

RuleEdit dql_join_type_flip(const RuleSubject& subj, Rng& rng) {
  const auto [idx, r] = pick(rng, dql_tokens(subj, &StatementTargets::joins));
  const auto& s = subj.at(idx);
  const auto sig = sig_in(s, r);
  bool natural = false, left = false;
  for (size_t t : sig) {
    natural = natural || s.is_word(t, "NATURAL");
    left = left || s.is_word(t, "LEFT") || s.is_word(t, "RIGHT") || s.is_word(t, "FULL");
  }
  std::string repl = left ? "INNER JOIN" : "LEFT JOIN";
  if (natural) repl = "NATURAL " + repl;
  return replace_statement(subj, idx, splice(s, r.begin, r.end, repl));
}

// Token index just past the first FROM item (table name and alias).
std::optional<size_t> from_item_end(const ClassifiedStatement& s, const SelectShape& shape) {
  if (!shape.from_kw || shape.from_table.empty()) return std::nullopt;
  const auto sig = s.significant_tokens();
  size_t k = static_cast<size_t>(std::find(sig.begin(), sig.end(), *shape.from_kw) - sig.begin()) + 1;
  if (k >= sig.size()) return std::nullopt;
  size_t end = sig[k] + 1;
  ++k;
  if (k < sig.size() && s.is_word(sig[k], "AS")) ++k;
  if (k < sig.size() && s.tokens[sig[k]].kind == TokenKind::kIdentifier &&
      normalize_identifier(s.token_text(sig[k])) == normalize_identifier(shape.from_ref)) {
    end = sig[k] + 1;
  }
  return end;
}

std::vector<size_t> self_join_sites(const RuleSubject& subj) {
  std::vector<size_t> out;
  for (size_t i : select_statements(subj, false)) {
    const auto& shape = *subj.shapes[i];
    if (!from_item_end(subj.at(i), shape)) continue;
    for (const auto& t : visible_tables(subj, i)) {
      if (t.name == shape.from_table) out.push_back(i);
    }
  }
  return out;
}

RuleEdit dql_add_self_join(const RuleSubject& subj, Rng& rng) {
  const size_t idx = pick(rng, self_join_sites(subj));
  const auto& s = subj.at(idx);
  const auto& shape = *subj.shapes[idx];
  TableInfo table;
  for (const auto& t : visible_tables(subj, idx)) {
    if (t.name == shape.from_table) table = t;
  }
  const std::string c = quote_ident(pick(rng, table.columns).name);
  const std::string kind = rng.chance(0.5) ? "JOIN" : "LEFT JOIN";
  const std::string join = kind + " (SELECT " + c + " AS mist_sj_k FROM " + quote_ident(table.name) +
                           ") AS mist_sj ON mist_sj.mist_sj_k IS " + shape.from_ref + "." + c;
  const size_t end = *from_item_end(s, shape);
  return replace_statement(subj, idx, splice(s, end, end, " " + join));
}

RuleEdit dql_add_where_subquery(const RuleSubject& subj, Rng& rng) {
  std::vector<size_t> sites;
  for (size_t i : column_sites(subj)) {
    if (any_table_visible(subj, i)) sites.push_back(i);
  }
  const size_t idx = pick(rng, sites);
  const std::string col = pick(rng, site_columns(subj, idx));
  const auto [t, c] = pick_table_column(rng, visible_tables(subj, idx));
  const std::string tn = quote_ident(t.name), cn = quote_ident(c.name);
  std::string pred;
  switch (rng.below(3)) {
    case 0:
      pred = col + " IN (SELECT " + cn + " FROM " + tn + ")";
      break;
    case 1:
      pred = col + " NOT IN (SELECT " + cn + " FROM " + tn + " WHERE " + cn + " IS NOT NULL)";
      break;
    default:
      pred = col + " >= (SELECT min(" + cn + ") FROM " + tn + ")";
      break;
  }
  return replace_statement(subj, idx, add_predicate(subj.at(idx), *subj.shapes[idx], pred));
}

std::vector<size_t> where_subquery_sites(const RuleSubject& subj) {
  std::vector<size_t> out;
  for (size_t i : column_sites(subj)) {
    if (any_table_visible(subj, i)) out.push_back(i);
  }
  return out;
}

RuleEdit dql_add_correlated_subquery(const RuleSubject& subj, Rng& rng) {
  const size_t idx = pick(rng, self_join_sites(subj));
  const auto& shape = *subj.shapes[idx];
  TableInfo outer;
  for (const auto& t : visible_tables(subj, idx)) {
    if (t.name == shape.from_table) outer = t;
  }
  const auto [inner, ic] = pick_table_column(rng, visible_tables(subj, idx));
  const std::string oc = quote_ident(pick(rng, outer.columns).name);
  const std::string pred = "(SELECT count(*) FROM " + quote_ident(inner.name) +
                           " AS mist_cq WHERE mist_cq." + quote_ident(ic.name) + " IS " +
                           shape.from_ref + "." + oc + ") >= 0";
  return replace_statement(subj, idx, add_predicate(subj.at(idx), shape, pred));
}

RuleEdit dql_add_exists(const RuleSubject& subj, Rng& rng) {
  const size_t idx = pick(rng, table_query_sites(subj));
  const auto [t, c] = pick_table_column(rng, visible_tables(subj, idx));
  std::string pred;
  if (rng.chance(0.5)) {
    pred = "EXISTS (SELECT 1 FROM " + quote_ident(t.name) + " WHERE " + quote_ident(c.name) +
           " IS NOT NULL)";
  } else {
    pred = "NOT EXISTS (SELECT 1 FROM " + quote_ident(t.name) + " WHERE 0)";
  }
  return replace_statement(subj, idx, add_predicate(subj.at(idx), *subj.shapes[idx], pred));
}

RuleEdit dql_add_in_list(const RuleSubject& subj, Rng& rng) {
  return predicate_on_column(subj, rng, [](const std::string& col, Rng& r) {
    std::string list;
    const int n = static_cast<int>(r.range(2, 5));
    for (int k = 0; k < n; ++k) {
      if (k) list += ", ";
      list += r.chance(0.7) ? std::to_string(r.range(-3, 10)) : "'" + random_word(r) + "'";
    }
    return col + (r.chance(0.5) ? " IN (" : " NOT IN (") + list + ")";
  });
}

RuleEdit dql_add_scalar_subquery_projection(const RuleSubject& subj, Rng& rng) {
  const size_t idx = pick(rng, table_query_sites(subj));
  const auto [t, c] = pick_table_column(rng, visible_tables(subj, idx));
  const std::string agg = rng.chance(0.5) ? "count(*)" : "max(" + quote_ident(c.name) + ")";
  return replace_statement(subj, idx,
                           add_projection(subj.at(idx), *subj.shapes[idx],
                                          "(SELECT " + agg + " FROM " + quote_ident(t.name) +
                                              ") AS mist_sq"));
}

RuleEdit dql_wrap_in_cte(const RuleSubject& subj, Rng& rng) {
  const size_t idx = pick(rng, dql_statements(subj));
  const std::string name = fresh_name(subj, "mist_cte");
  return replace_statement(subj, idx,
                           "WITH " + name + " AS (" + body(subj.at(idx)) + ") SELECT * FROM " +
                               name + ";");
}

RuleEdit dql_add_window_function(const RuleSubject& subj, Rng& rng) {
  return projection_on_site(subj, rng, [](const std::vector<std::string>& cols, Rng& r) {
    if (cols.empty()) return std::string("row_number() OVER () AS mist_w");
    const std::string& c = pick(r, cols);
    switch (r.below(4)) {
      case 0:
        return "row_number() OVER (ORDER BY " + c + ") AS mist_w";
      case 1:
        return "sum(" + c + ") OVER () AS mist_w";
      case 2:
        return "rank() OVER (PARTITION BY " + c + " ORDER BY " + c + ") AS mist_w";
      default:
        return "lead(" + c + ", 1) OVER (ORDER BY " + c + ") AS mist_w";
    }
  });
}

std::vector<size_t> group_sites(const RuleSubject& subj) {
  std::vector<size_t> out;
  for (size_t i : column_sites(subj)) {
    const auto& shape = *subj.shapes[i];
    if (!shape.group_kw && !shape.having_kw && shape.from_kw) out.push_back(i);
  }
  return out;
}

RuleEdit dql_add_group_by_having(const RuleSubject& subj, Rng& rng) {
  const size_t idx = pick(rng, group_sites(subj));
  const std::string col = pick(rng, site_columns(subj, idx));
  const std::string having = rng.chance(0.5) ? "count(*) >= 1" : "count(" + col + ") >= 0";
  return replace_statement(subj, idx,
                           insert_before(subj.at(idx), subj.shapes[idx]->insertion_point(1),
                                         "GROUP BY " + col + " HAVING " + having));
}

bool uses_window(const ClassifiedStatement& s) {
  for (size_t i = 0; i < s.tokens.size(); ++i) {
    if (s.is_word(i, "OVER")) return true;
  }
  return false;
}

std::vector<size_t> aggregate_sites(const RuleSubject& subj) {
  std::vector<size_t> out;
  for (size_t i : select_statements(subj, false)) {
    if (!uses_window(subj.at(i))) out.push_back(i);
  }
  return out;
}

RuleEdit dql_add_aggregate(const RuleSubject& subj, Rng& rng) {
  const size_t idx = pick(rng, aggregate_sites(subj));
  const auto cols = site_columns(subj, idx);
  std::string expr = "count(*) AS mist_agg";
  if (!cols.empty() && rng.chance(0.75)) {
    static constexpr std::array<const char*, 5> kFns = {"max", "min", "avg", "total",
                                                        "group_concat"};
    expr = std::string(pick(rng, kFns)) + "(" + pick(rng, cols) + ") AS mist_agg";
  }
  return replace_statement(subj, idx, add_projection(subj.at(idx), *subj.shapes[idx], expr));
}

std::vector<size_t> distinct_sites(const RuleSubject& subj) {
  std::vector<size_t> out;
  for (size_t i : select_statements(subj, false)) {
    const auto& shape = *subj.shapes[i];
    if (!shape.quantifier || !subj.at(i).is_word(*shape.quantifier, "DISTINCT")) out.push_back(i);
  }
  return out;
}

RuleEdit dql_add_distinct(const RuleSubject& subj, Rng& rng) {
  const size_t idx = pick(rng, distinct_sites(subj));
  const auto& s = subj.at(idx);
  const auto& shape = *subj.shapes[idx];
  if (shape.quantifier) {
    return replace_statement(subj, idx, splice(s, *shape.quantifier, *shape.quantifier + 1, "DISTINCT"));
  }
  return replace_statement(subj, idx, splice(s, shape.select_kw + 1, shape.select_kw + 1, " DISTINCT"));
}

RuleEdit dql_add_order_by(const RuleSubject& subj, Rng& rng) {
  const size_t idx = pick(rng, select_statements(subj, true));
  const auto& s = subj.at(idx);
  const auto& shape = *subj.shapes[idx];
  std::string term;
  const auto cols = shape.compound ? std::vector<std::string>{} : site_columns(subj, idx);
  if (!cols.empty() && rng.chance(0.5)) {
    term = pick(rng, cols) + (rng.chance(0.5) ? " COLLATE NOCASE" : " COLLATE BINARY DESC");
  } else {
    term = "1";
    if (rng.chance(0.5)) term += " DESC";
    if (rng.chance(0.5)) term += rng.chance(0.5) ? " NULLS FIRST" : " NULLS LAST";
  }
  const size_t before = shape.limit_kw ? *shape.limit_kw : shape.end;
  if (shape.order_kw) {
    size_t p = before;
    while (p > 0 && !s.significant(p - 1)) --p;
    return replace_statement(subj, idx, splice(s, p, p, ", " + term));
  }
  return replace_statement(subj, idx, insert_before(s, before, "ORDER BY " + term));
}

std::vector<size_t> limit_sites(const RuleSubject& subj) {
  std::vector<size_t> out;
  for (size_t i : select_statements(subj, true)) {
    if (!subj.shapes[i]->limit_kw) out.push_back(i);
  }
  return out;
}

RuleEdit dql_add_limit_offset(const RuleSubject& subj, Rng& rng) {
  const size_t idx = pick(rng, limit_sites(subj));
  std::string clause = "LIMIT " + std::to_string(rng.range(0, 10));
  if (rng.chance(0.6)) clause += " OFFSET " + std::to_string(rng.range(0, 3));
  return replace_statement(subj, idx, insert_before(subj.at(idx), subj.shapes[idx]->end, clause));
}

RuleEdit dql_add_case_when(const RuleSubject& subj, Rng& rng) {
  return projection_on_site(subj, rng, [](const std::vector<std::string>& cols, Rng& r) {
    const std::string c = cols.empty() ? std::string("1") : pick(r, cols);
    return "CASE WHEN " + c + " IS NULL THEN 'null' WHEN " + c + " > " +
           std::to_string(r.range(-2, 5)) + " THEN 'high' ELSE 'low' END AS mist_case";
  });
}

RuleEdit dql_add_null_predicate(const RuleSubject& subj, Rng& rng) {
  return predicate_on_column(subj, rng,
                             [](const std::string& col, Rng&) { return col + " IS NOT NULL"; });
}

RuleEdit dql_operator_flip(const RuleSubject& subj, Rng& rng) {
  const auto [idx, r] = pick(rng, dql_tokens(subj, &StatementTargets::comparisons));
  const auto& s = subj.at(idx);
  const std::string_view op = s.token_text(r.begin);
  std::string flipped;
  if (op == "=") flipped = "<>";
  else if (op == "==") flipped = "!=";
  else if (op == "<>") flipped = "=";
  else if (op == "!=") flipped = "==";
  else if (op == "<") flipped = ">=";
  else if (op == ">=") flipped = "<";
  else if (op == ">") flipped = "<=";
  else flipped = ">";
  return replace_statement(subj, idx, splice(s, r.begin, r.end, flipped));
}

RuleEdit dql_add_like_glob(const RuleSubject& subj, Rng& rng) {
  return predicate_on_column(subj, rng, [](const std::string& col, Rng& r) {
    switch (r.below(4)) {
      case 0:
        return col + " LIKE '%a%'";
      case 1:
        return col + " GLOB '*[0-9]*'";
      case 2:
        return col + " NOT LIKE 'z\\_%' ESCAPE '\\'";
      default:
        return "(" + col + " LIKE '_%' OR " + col + " IS NULL)";
    }
  });
}

// Projection items whose expression can be wrapped without touching aliases.
std::vector<std::pair<size_t, TokenRange>> castable_items(const RuleSubject& subj) {
  std::vector<std::pair<size_t, TokenRange>> out;
  for (size_t i : select_statements(subj, false)) {
    const auto& s = subj.at(i);
    for (auto item : split_top_level(s, subj.shapes[i]->projection)) {
      const auto sig = sig_in(s, item);
      if (sig.empty()) continue;
      size_t end = sig.size();
      int depth = 0;
      for (size_t k = 0; k < sig.size(); ++k) {
        const auto t = s.token_text(sig[k]);
        if (t == "(") ++depth;
        if (t == ")") --depth;
        if (depth == 0 && s.is_word(sig[k], "AS")) {
          end = k;
          break;
        }
      }
      if (end == 0) continue;
      const auto last = s.token_text(sig[end - 1]);
      if (last == "*") continue;
      if (end == sig.size() && end >= 2 && s.tokens[sig[end - 1]].kind == TokenKind::kIdentifier &&
          s.token_text(sig[end - 2]) != ".") {
        continue;  // implicit alias
      }
      out.emplace_back(i, TokenRange{sig[0], sig[end - 1] + 1});
    }
  }
  return out;
}

RuleEdit dql_add_cast(const RuleSubject& subj, Rng& rng) {
  static constexpr std::array<const char*, 5> kTypes = {"TEXT", "INTEGER", "REAL", "NUMERIC",
                                                        "BLOB"};
  const std::string type = pick(rng, kTypes);
  const auto items = castable_items(subj);
  if (!items.empty()) {
    const auto [idx, r] = pick(rng, items);
    const auto& s = subj.at(idx);
    return replace_statement(subj, idx,
                             splice(s, r.begin, r.end, "CAST(" + range_text(s, r) + " AS " + type + ")"));
  }
  return projection_on_site(subj, rng, [&](const std::vector<std::string>& cols, Rng& r) {
    const std::string c = cols.empty() ? std::string("'1'") : pick(r, cols);
    return "CAST(" + c + " AS " + type + ") AS mist_cast";
  });
}

RuleEdit dql_add_set_operation(const RuleSubject& subj, Rng& rng) {
  static constexpr std::array<const char*, 4> kOps = {"UNION", "UNION ALL", "EXCEPT", "INTERSECT"};
  const size_t idx = pick(rng, dql_statements(subj));
  const std::string q = body(subj.at(idx));
  return replace_statement(subj, idx,
                           "SELECT * FROM (" + q + ") " + pick(rng, kOps) + " SELECT * FROM (" + q + ");");
}

RuleEdit dql_add_projection_arithmetic(const RuleSubject& subj, Rng& rng) {
  return projection_on_site(subj, rng, [](const std::vector<std::string>& cols, Rng& r) {
    const std::string c = cols.empty() ? std::to_string(r.range(1, 9)) : pick(r, cols);
    switch (r.below(4)) {
      case 0:
        return c + " * 2 + 1 AS mist_ar";
      case 1:
        return c + " % 7 AS mist_ar";
      case 2:
        return "-(" + c + ") AS mist_ar";
      default:
        return c + " / 3.0 AS mist_ar";
    }
  });
}

RuleEdit dql_add_string_function(const RuleSubject& subj, Rng& rng) {
  return projection_on_site(subj, rng, [](const std::vector<std::string>& cols, Rng& r) {
    const std::string c = cols.empty() ? std::string("'mist'") : pick(r, cols);
    static constexpr std::array<const char*, 8> kFormats = {
        "upper(%)", "substr(%, 1, 2)", "replace(%, 'a', 'b')", "length(%)",
        "trim(%)",  "instr(%, 'a')",   "printf('%s', %)",      "hex(%)"};
    std::string f = pick(r, kFormats);
    std::string out;
    for (size_t k = 0; k < f.size(); ++k) {
      if (f[k] == '%' && (k + 1 >= f.size() || f[k + 1] != 's')) {
        out += c;
      } else {
        out += f[k];
      }
    }
    return out + " AS mist_str";
  });
}

RuleEdit dql_add_datetime_function(const RuleSubject& subj, Rng& rng) {
  return projection_on_site(subj, rng, [](const std::vector<std::string>&, Rng& r) {
    static constexpr std::array<const char*, 6> kCalls = {
        "date('2024-01-15', '+1 month')",
        "strftime('%Y-%m', '2020-02-29')",
        "julianday('2000-01-01')",
        "datetime('2024-01-15 10:00:00', '-3 hours')",
        "time('12:30:45', '+90 seconds')",
        "date('2023-12-31', 'start of month', '+1 day')"};
    return std::string(pick(r, kCalls)) + " AS mist_dt";
  });
}

RuleEdit dql_nest_derived_table(const RuleSubject& subj, Rng& rng) {
  const size_t idx = pick(rng, dql_statements(subj));
  const std::string name = fresh_name(subj, "mist_dt");
  return replace_statement(subj, idx,
                           "SELECT * FROM (" + body(subj.at(idx)) + ") AS " + name + ";");
}

RuleEdit dql_explain_query_plan_twin(const RuleSubject& subj, Rng& rng) {
  const size_t idx = pick(rng, dql_statements(subj));
  return insert_statements(subj, idx + 1, {"EXPLAIN QUERY PLAN " + body(subj.at(idx)) + ";"});
}

// ---------------------------------------------------------------------------

bool has(const std::vector<size_t>& v) { return !v.empty(); }

template <typename T>
bool nonempty(const std::vector<T>& v) {
  return !v.empty();
}

std::vector<std::shared_ptr<const MutationRule>> shipped_rules() {
  using C = RuleCategory;
  auto rule = [](std::string id, C cat, std::string desc, int delta, MutationRule::Predicate p,
                 MutationRule::Transform t) {
    return std::make_shared<const MutationRule>(std::move(id), cat, std::move(desc), delta,
                                                std::move(p), std::move(t));
  };
  auto stable = [](const RuleSubject& s) { return has_stable_table(s); };
  auto creatable = [](const RuleSubject& s) { return nonempty(creatable_sites(s)); };
  auto any_dql = [](const RuleSubject& s) { return has(dql_statements(s)); };
  auto simple = [](const RuleSubject& s) { return has(select_statements(s, false)); };
  auto with_column = [](const RuleSubject& s) { return has(column_sites(s)); };
  auto values = [](const RuleSubject& s) { return nonempty(value_sites(s)); };

  std::vector<std::shared_ptr<const MutationRule>> r;
  r.push_back(rule("ddl.add_column_exotic_type", C::kDDL,
                   "ALTER TABLE ADD COLUMN with an unusual declared type", 1, stable,
                   ddl_add_column_exotic_type));
  r.push_back(rule("ddl.add_not_null_default", C::kDDL,
                   "ALTER TABLE ADD COLUMN with NOT NULL and DEFAULT", 1, stable,
                   ddl_add_not_null_default));
  r.push_back(rule("ddl.create_index", C::kDDL, "single, compound or partial index on a table", 1,
                   stable, ddl_create_index));
  r.push_back(rule("ddl.create_view", C::kDDL, "view over an existing query, then read it", 2,
                   any_dql, ddl_create_view));
  r.push_back(rule("ddl.add_check", C::kDDL, "tautological CHECK constraint on a CREATE TABLE", 0,
                   creatable, ddl_add_check));
  r.push_back(rule("ddl.add_unique", C::kDDL, "UNIQUE constraint over a key superset", 0, creatable,
                   ddl_add_unique));
  r.push_back(rule("ddl.rename_table", C::kDDL, "rename a table and rewrite later references", 1,
                   stable, ddl_rename_table));
  r.push_back(rule("ddl.create_trigger", C::kDDL, "row trigger on a table", 1, stable,
                   ddl_create_trigger));
  r.push_back(rule("ddl.recreate_without_rowid", C::kDDL,
                   "drop a fresh table and recreate it WITHOUT ROWID", 2,
                   [](const RuleSubject& s) {
                     for (const auto& site : creatable_sites(s)) {
                       if (!site.info.without_rowid) return true;
                     }
                     return false;
                   },
                   ddl_recreate_without_rowid));
  r.push_back(rule("ddl.add_generated_column", C::kDDL, "virtual generated column", 1, stable,
                   ddl_add_generated_column));

  r.push_back(rule("dml.boundary_value_insert", C::kDML, "replace an inserted value with a boundary value", 0,
                   values, dml_boundary_value_insert));
  r.push_back(rule("dml.null_injection", C::kDML, "add an all-NULL row after an INSERT", 1,
                   [](const RuleSubject& s) { return has(null_injection_sites(s)); },
                   dml_null_injection));
  r.push_back(rule("dml.bulk_insert", C::kDML, "extend an INSERT with perturbed rows", 0,
                   [](const RuleSubject& s) { return has(bulk_sites(s)); }, dml_bulk_insert));
  r.push_back(rule("dml.update_expression", C::kDML, "UPDATE a column with an expression", 1, stable,
                   dml_update_expression));
  r.push_back(rule("dml.delete_predicate", C::kDML, "DELETE rows matching a predicate", 1, stable,
                   dml_delete_predicate));
  r.push_back(rule("dml.insert_or_replace", C::kDML, "turn INSERT into INSERT OR REPLACE", 0,
                   [](const RuleSubject& s) { return has(plain_insert_sites(s)); },
                   dml_insert_or_replace));
  r.push_back(rule("dml.extreme_numeric", C::kDML, "replace a numeric literal with an extreme value", 0,
                   [](const RuleSubject& s) {
                     return nonempty(dml_tokens(s, &StatementTargets::numeric_literals));
                   },
                   dml_extreme_numeric));
  r.push_back(rule("dml.unicode_long_string", C::kDML, "replace a string literal with unicode or a long string",
                   0,
                   [](const RuleSubject& s) {
                     return nonempty(dml_tokens(s, &StatementTargets::string_literals));
                   },
                   dml_unicode_long_string));
  r.push_back(rule("dml.type_mismatch_literal", C::kDML, "insert a literal of another storage class", 0,
                   values, dml_type_mismatch_literal));
  r.push_back(rule("dml.transaction_wrap", C::kDML, "wrap a DML statement in BEGIN/COMMIT", 2,
                   [](const RuleSubject& s) { return has(transaction_free_dml(s)); },
                   dml_transaction_wrap));

  r.push_back(rule("dql.join_type_flip", C::kDQL, "swap INNER and LEFT joins", 0,
                   [](const RuleSubject& s) { return nonempty(dql_tokens(s, &StatementTargets::joins)); },
                   dql_join_type_flip));
  r.push_back(rule("dql.add_self_join", C::kDQL, "join the FROM table with itself", 0,
                   [](const RuleSubject& s) { return has(self_join_sites(s)); }, dql_add_self_join));
  r.push_back(rule("dql.add_where_subquery", C::kDQL, "subquery predicate in WHERE", 0,
                   [](const RuleSubject& s) { return has(where_subquery_sites(s)); },
                   dql_add_where_subquery));
  r.push_back(rule("dql.add_correlated_subquery", C::kDQL, "correlated subquery predicate", 0,
                   [](const RuleSubject& s) { return has(self_join_sites(s)); },
                   dql_add_correlated_subquery));
  r.push_back(rule("dql.add_exists", C::kDQL, "EXISTS or NOT EXISTS predicate", 0,
                   [](const RuleSubject& s) { return has(table_query_sites(s)); }, dql_add_exists));
  r.push_back(rule("dql.add_in_list", C::kDQL, "IN / NOT IN literal list predicate", 0, with_column,
                   dql_add_in_list));
  r.push_back(rule("dql.add_scalar_subquery_projection", C::kDQL, "scalar subquery in the projection", 0,
                   [](const RuleSubject& s) { return has(table_query_sites(s)); },
                   dql_add_scalar_subquery_projection));
  r.push_back(rule("dql.wrap_in_cte", C::kDQL, "wrap the query in a common table expression", 0, any_dql,
                   dql_wrap_in_cte));
  r.push_back(rule("dql.add_window_function", C::kDQL, "window function in the projection", 0, simple,
                   dql_add_window_function));
  r.push_back(rule("dql.add_group_by_having", C::kDQL, "GROUP BY with HAVING", 0,
                   [](const RuleSubject& s) { return has(group_sites(s)); }, dql_add_group_by_having));
  r.push_back(rule("dql.add_aggregate", C::kDQL, "aggregate in the projection", 0,
                   [](const RuleSubject& s) { return has(aggregate_sites(s)); }, dql_add_aggregate));
  r.push_back(rule("dql.add_distinct", C::kDQL, "make the projection DISTINCT", 0,
                   [](const RuleSubject& s) { return has(distinct_sites(s)); }, dql_add_distinct));
  r.push_back(rule("dql.add_order_by", C::kDQL, "ORDER BY term, positional or with COLLATE", 0,
                   [](const RuleSubject& s) { return has(select_statements(s, true)); },
                   dql_add_order_by));
  r.push_back(rule("dql.add_limit_offset", C::kDQL, "LIMIT with optional OFFSET", 0,
                   [](const RuleSubject& s) { return has(limit_sites(s)); }, dql_add_limit_offset));
  r.push_back(rule("dql.add_case_when", C::kDQL, "CASE WHEN expression in the projection", 0, simple,
                   dql_add_case_when));
  r.push_back(rule("dql.add_null_predicate", C::kDQL, "IS NOT NULL predicate", 0, with_column,
                   dql_add_null_predicate));
  r.push_back(rule("dql.operator_flip", C::kDQL, "flip a comparison operator", 0,
                   [](const RuleSubject& s) {
                     return nonempty(dql_tokens(s, &StatementTargets::comparisons));
                   },
                   dql_operator_flip));
  r.push_back(rule("dql.add_like_glob", C::kDQL, "LIKE or GLOB predicate", 0, with_column,
                   dql_add_like_glob));
  r.push_back(rule("dql.add_cast", C::kDQL, "CAST a projected expression", 0, simple, dql_add_cast));
  r.push_back(rule("dql.add_set_operation", C::kDQL, "combine the query with itself by a set operator", 0,
                   any_dql, dql_add_set_operation));
  r.push_back(rule("dql.add_projection_arithmetic", C::kDQL, "arithmetic expression in the projection", 0,
                   simple, dql_add_projection_arithmetic));
  r.push_back(rule("dql.add_string_function", C::kDQL, "string function in the projection", 0, simple,
                   dql_add_string_function));
  r.push_back(rule("dql.add_datetime_function", C::kDQL, "date/time function in the projection", 0, simple,
                   dql_add_datetime_function));
  r.push_back(rule("dql.nest_derived_table", C::kDQL, "nest the query as a derived table", 0, any_dql,
                   dql_nest_derived_table));
  r.push_back(rule("dql.explain_query_plan_twin", C::kDQL, "EXPLAIN QUERY PLAN copy of a query", 1,
                   any_dql, dql_explain_query_plan_twin));

  for (C c : {C::kDDL, C::kDML, C::kDQL}) {
    r.push_back(std::make_shared<const MutationRule>(
        noop_rule_id(c), c, "leave the case unchanged", 0,
        [](const RuleSubject&) { return true; }, MutationRule::Transform{}));
  }
  return r;
}

}  // namespace

MutationRule::MutationRule(std::string id, RuleCategory category, std::string description,
                           int statement_delta, Predicate applicable, Transform transform,
                           std::set<std::string> dialects)
    : id_(std::move(id)),
      category_(category),
      description_(std::move(description)),
      statement_delta_(statement_delta),
      applicable_(std::move(applicable)),
      transform_(std::move(transform)),
      dialects_(std::move(dialects)) {}

bool MutationRule::applicable(const TestCase& tc) const {
  if (is_noop()) return true;
  if (tc.statements.empty()) return false;
  return applicable_(make_subject(tc));
}

MutationOutcome MutationRule::apply(const TestCase& tc, Rng& rng) const {
  Mutated prov;
  if (const auto* m = std::get_if<Mutated>(&tc.provenance)) {
    prov = *m;
  } else {
    prov.parent_id = tc.id;
  }
  prov.rules.push_back(id_);
  if (is_noop()) {
    TestCase same = tc;
    same.provenance = prov;
    return {std::move(same), id_, {}};
  }
  const RuleSubject subj = make_subject(tc);
  if (tc.statements.empty() || !applicable_(subj)) {
    throw NotApplicable(id_ + " has no target in case " + tc.id);
  }
  RuleEdit edit = transform_(subj, rng);
  std::sort(edit.changed.begin(), edit.changed.end());
  return {make_case(tc.id, edit.statements, prov), id_, std::move(edit.changed)};
}

bool applicable(const MutationRule& rule, const TestCase& tc) { return rule.applicable(tc); }

MutationOutcome apply(const MutationRule& rule, const TestCase& tc, Rng& rng) {
  return rule.apply(tc, rng);
}

void RuleRegistry::add(std::shared_ptr<const MutationRule> rule) {
  const std::string id = rule->id();
  if (!by_id_.emplace(id, std::move(rule)).second) {
    throw ConfigError("duplicate rule id " + id);
  }
}

RuleRegistry RuleRegistry::sqlite() {
  RuleRegistry reg;
  for (auto& r : shipped_rules()) reg.add(std::move(r));
  return reg;
}

RuleRegistry RuleRegistry::from_manifest(const nlohmann::json& manifest) {
  if (!manifest.is_object() || !manifest.contains("dialect") || !manifest.contains("enabled")) {
    throw ConfigError("rule manifest needs \"dialect\" and \"enabled\"");
  }
  const std::string dialect = manifest["dialect"].get<std::string>();
  if (dialect != "sqlite") throw UnknownDialect("no rules ship for dialect '" + dialect + "'");
  std::set<std::string> enabled;
  for (const auto& id : manifest["enabled"]) enabled.insert(id.get<std::string>());
  RuleRegistry all = sqlite();
  for (const auto& id : enabled) {
    if (!all.contains(id)) throw UnknownRule("manifest enables unknown rule '" + id + "'");
  }
  RuleRegistry reg;
  for (const auto& [id, rule] : all.by_id_) {
    if (rule->is_noop() || enabled.count(id)) reg.add(rule);
  }
  return reg;
}

RuleRegistry RuleRegistry::load_manifest(const std::filesystem::path& path) {
  return from_manifest(read_json_file(path));
}

const MutationRule& RuleRegistry::get(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw UnknownRule("no rule '" + id + "'");
  return *it->second;
}

std::vector<const MutationRule*> RuleRegistry::rules(const std::string& dialect,
                                                     RuleCategory category) const {
  std::vector<const MutationRule*> out;
  for (const auto& [_, r] : by_id_) {
    if (r->category() == category && r->dialects().count(dialect)) out.push_back(r.get());
  }
  return out;
}

std::set<std::string> RuleRegistry::dialects() const {
  std::set<std::string> out;
  for (const auto& [_, r] : by_id_) out.insert(r->dialects().begin(), r->dialects().end());
  return out;
}

nlohmann::json RuleRegistry::manifest(const std::string& dialect) const {
  nlohmann::json enabled = nlohmann::json::array();
  for (const auto& [id, r] : by_id_) {
    if (!r->is_noop() && r->dialects().count(dialect)) enabled.push_back(id);
  }
  return {{"dialect", dialect}, {"enabled", enabled}};
}

std::vector<std::string> rule_menu(const RuleRegistry& registry, const std::string& dialect,
                                   RuleCategory category) {
  if (!registry.dialects().count(dialect)) {
    throw UnknownDialect("no rules registered for dialect '" + dialect + "'");
  }
  std::vector<std::string> ids;
  for (const auto* r : registry.rules(dialect, category)) ids.push_back(r->id());
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace mist
