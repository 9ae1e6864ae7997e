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

#include "mist/sql_model.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

#include "mist/error.h"

namespace mist {

namespace {

const std::unordered_set<std::string>& keyword_set() {
  static const std::unordered_set<std::string> kWords = {
      "ABORT", "ACTION", "ADD", "AFTER", "ALL", "ALTER", "ALWAYS", "ANALYZE", "AND", "AS",
      "ASC", "ATTACH", "AUTOINCREMENT", "BEFORE", "BEGIN", "BETWEEN", "BY", "CASCADE", "CASE",
      "CAST", "CHECK", "COLLATE", "COLUMN", "COMMIT", "CONFLICT", "CONSTRAINT", "CREATE",
      "CROSS", "CURRENT", "CURRENT_DATE", "CURRENT_TIME", "CURRENT_TIMESTAMP", "DATABASE",
      "DEFAULT", "DEFERRABLE", "DEFERRED", "DELETE", "DESC", "DETACH", "DISTINCT", "DO",
      "DROP", "EACH", "ELSE", "END", "ESCAPE", "EXCEPT", "EXCLUDE", "EXCLUSIVE", "EXISTS",
      "EXPLAIN", "FAIL", "FILTER", "FIRST", "FOLLOWING", "FOR", "FOREIGN", "FROM", "FULL",
      "GENERATED", "GLOB", "GROUP", "GROUPS", "HAVING", "IF", "IGNORE", "IMMEDIATE", "IN",
      "INDEX", "INDEXED", "INITIALLY", "INNER", "INSERT", "INSTEAD", "INTERSECT", "INTO", "IS",
      "ISNULL", "JOIN", "KEY", "LAST", "LEFT", "LIKE", "LIMIT", "MATCH", "MATERIALIZED",
      "NATURAL", "NO", "NOT", "NOTHING", "NOTNULL", "NULL", "NULLS", "OF", "OFFSET", "ON",
      "OR", "ORDER", "OTHERS", "OUTER", "OVER", "PARTITION", "PLAN", "PRAGMA", "PRECEDING",
      "PRIMARY", "QUERY", "RAISE", "RANGE", "RECURSIVE", "REFERENCES", "REGEXP", "REINDEX",
      "RELEASE", "RENAME", "REPLACE", "RESTRICT", "RETURNING", "RIGHT", "ROLLBACK", "ROW",
      "ROWS", "SAVEPOINT", "SELECT", "SET", "STORED", "TABLE", "TEMP", "TEMPORARY", "THEN",
      "TIES", "TO", "TRANSACTION", "TRIGGER", "UNBOUNDED", "UNION", "UNIQUE", "UPDATE",
      "USING", "VACUUM", "VALUES", "VIEW", "VIRTUAL", "WHEN", "WHERE", "WINDOW", "WITH",
      "WITHOUT", "TRUE", "FALSE"};
  return kWords;
}

std::string to_upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool word_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool word_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

size_t scan_quoted(std::string_view text, size_t pos, char close, const char* what) {
  // pos is at the opening quote; doubled closing quotes are escapes.
  size_t i = pos + 1;
  while (i < text.size()) {
    if (text[i] == close) {
      if (close != ']' && i + 1 < text.size() && text[i + 1] == close) {
        i += 2;
        continue;
      }
      return i + 1;
    }
    ++i;
  }
  throw UnterminatedLiteral(std::string("unterminated ") + what + " at offset " +
                            std::to_string(pos));
}

}  // namespace

bool is_sql_keyword(std::string_view word) { return keyword_set().count(to_upper(word)) > 0; }

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  size_t i = 0;
  const size_t n = text.size();
  auto push = [&](TokenKind kind, size_t end) {
    out.push_back({kind, i, end - i});
    i = end;
  };
  while (i < n) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      size_t j = i;
      while (j < n && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
      push(TokenKind::kWhitespace, j);
    } else if (c == '-' && i + 1 < n && text[i + 1] == '-') {
      size_t j = text.find('\n', i);
      push(TokenKind::kComment, j == std::string_view::npos ? n : j);
    } else if (c == '/' && i + 1 < n && text[i + 1] == '*') {
      size_t j = text.find("*/", i + 2);
      push(TokenKind::kComment, j == std::string_view::npos ? n : j + 2);
    } else if (c == '\'') {
      push(TokenKind::kString, scan_quoted(text, i, '\'', "string literal"));
    } else if ((c == 'x' || c == 'X') && i + 1 < n && text[i + 1] == '\'') {
      const size_t end = scan_quoted(text, i + 1, '\'', "blob literal");
      push(TokenKind::kBlob, end);
    } else if (c == '"') {
      push(TokenKind::kIdentifier, scan_quoted(text, i, '"', "quoted identifier"));
    } else if (c == '`') {
      push(TokenKind::kIdentifier, scan_quoted(text, i, '`', "quoted identifier"));
    } else if (c == '[') {
      push(TokenKind::kIdentifier, scan_quoted(text, i, ']', "bracketed identifier"));
    } else if (std::isdigit(c) ||
               (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      size_t j = i;
      if (c == '0' && j + 1 < n && (text[j + 1] == 'x' || text[j + 1] == 'X')) {
        j += 2;
        while (j < n && std::isxdigit(static_cast<unsigned char>(text[j]))) ++j;
      } else {
        while (j < n && (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.')) ++j;
        if (j < n && (text[j] == 'e' || text[j] == 'E')) {
          size_t k = j + 1;
          if (k < n && (text[k] == '+' || text[k] == '-')) ++k;
          if (k < n && std::isdigit(static_cast<unsigned char>(text[k]))) {
            while (k < n && std::isdigit(static_cast<unsigned char>(text[k]))) ++k;
            j = k;
          }
        }
      }
      push(TokenKind::kNumber, j);
    } else if (word_start(c)) {
      size_t j = i;
      while (j < n && word_char(static_cast<unsigned char>(text[j]))) ++j;
      push(is_sql_keyword(text.substr(i, j - i)) ? TokenKind::kKeyword : TokenKind::kIdentifier, j);
    } else if (c == '?' || ((c == ':' || c == '@' || c == '$') && i + 1 < n &&
                            word_char(static_cast<unsigned char>(text[i + 1])))) {
      size_t j = i + 1;
      while (j < n && word_char(static_cast<unsigned char>(text[j]))) ++j;
      push(TokenKind::kIdentifier, j);
    } else {
      static constexpr std::array<std::string_view, 11> kMulti = {
          "->>", "||", "<=", ">=", "<>", "!=", "==", "<<", ">>", "->", "<="};
      bool matched = false;
      for (auto op : kMulti) {
        if (text.substr(i, op.size()) == op) {
          push(TokenKind::kOperator, i + op.size());
          matched = true;
          break;
        }
      }
      if (matched) continue;
      if (std::string_view("+-*/%<>=&|~!").find(static_cast<char>(c)) != std::string_view::npos) {
        push(TokenKind::kOperator, i + 1);
      } else {
        push(TokenKind::kPunctuation, i + 1);
      }
    }
  }
  return out;
}

const char* to_string(StatementKind kind) {
  switch (kind) {
    case StatementKind::kDDL:
      return "DDL";
    case StatementKind::kDML:
      return "DML";
    case StatementKind::kDQL:
      return "DQL";
    case StatementKind::kOther:
      return "Other";
  }
  return "Other";
}

std::string ClassifiedStatement::upper(size_t i) const { return to_upper(token_text(i)); }

std::vector<size_t> ClassifiedStatement::significant_tokens() const {
  std::vector<size_t> out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (significant(i)) out.push_back(i);
  }
  return out;
}

bool ClassifiedStatement::is_word(size_t i, std::string_view upper_word) const {
  if (i >= tokens.size()) return false;
  const auto k = tokens[i].kind;
  if (k != TokenKind::kKeyword && k != TokenKind::kIdentifier) return false;
  const auto t = token_text(i);
  if (t.size() != upper_word.size()) return false;
  for (size_t j = 0; j < t.size(); ++j) {
    if (std::toupper(static_cast<unsigned char>(t[j])) != upper_word[j]) return false;
  }
  return true;
}

ClassifiedStatement classify(std::string_view statement_text) {
  ClassifiedStatement stmt;
  stmt.text = std::string(statement_text);
  stmt.tokens = tokenize(stmt.text);
  auto sig = stmt.significant_tokens();
  if (sig.empty() || (sig.size() == 1 && stmt.token_text(sig[0]) == ";")) {
    throw EmptyStatement("statement has no SQL tokens");
  }
  if (stmt.token_text(sig.back()) != ";") {
    // Keep trailing trivia after the terminator out of the statement body.
    size_t cut = stmt.tokens[sig.back()].offset + stmt.tokens[sig.back()].length;
    stmt.text = stmt.text.substr(0, cut) + ";";
    stmt.tokens = tokenize(stmt.text);
    sig = stmt.significant_tokens();
  }
  const std::string lead = stmt.upper(sig.front());
  if (lead == "CREATE" || lead == "ALTER" || lead == "DROP") {
    stmt.kind = StatementKind::kDDL;
  } else if (lead == "INSERT" || lead == "UPDATE" || lead == "DELETE" || lead == "REPLACE") {
    stmt.kind = StatementKind::kDML;
  } else if (lead == "SELECT" || lead == "WITH") {
    stmt.kind = StatementKind::kDQL;
  } else {
    stmt.kind = StatementKind::kOther;
  }
  return stmt;
}

namespace {

bool is_clause_word(const ClassifiedStatement& s, size_t i) {
  static constexpr std::array<std::string_view, 12> kWords = {
      "FROM", "WHERE", "GROUP", "HAVING", "WINDOW", "ORDER", "LIMIT",
      "UNION", "EXCEPT", "INTERSECT", "RETURNING", "ON"};
  for (auto w : kWords) {
    if (s.is_word(i, w)) return true;
  }
  return false;
}

// Index into `sig` of the matching ')' for the '(' at sig[k], or sig.size().
size_t match_paren(const ClassifiedStatement& s, const std::vector<size_t>& sig, size_t k) {
  int depth = 0;
  for (size_t j = k; j < sig.size(); ++j) {
    const auto t = s.token_text(sig[j]);
    if (t == "(") ++depth;
    if (t == ")" && --depth == 0) return j;
  }
  return sig.size();
}

}  // namespace

StatementTargets locate_targets(const ClassifiedStatement& s) {
  StatementTargets out;
  const auto sig = s.significant_tokens();
  std::vector<int> depth(sig.size(), 0);
  {
    int d = 0;
    for (size_t k = 0; k < sig.size(); ++k) {
      const auto t = s.token_text(sig[k]);
      if (t == ")") --d;
      depth[k] = d;
      if (t == "(") ++d;
    }
  }

  for (size_t k = 0; k < sig.size(); ++k) {
    const size_t i = sig[k];
    const auto kind = s.tokens[i].kind;
    const auto text = s.token_text(i);

    if (s.is_word(i, "JOIN")) {
      size_t b = k;
      while (b > 0 && (s.is_word(sig[b - 1], "INNER") || s.is_word(sig[b - 1], "LEFT") ||
                       s.is_word(sig[b - 1], "RIGHT") || s.is_word(sig[b - 1], "FULL") ||
                       s.is_word(sig[b - 1], "OUTER") || s.is_word(sig[b - 1], "CROSS") ||
                       s.is_word(sig[b - 1], "NATURAL"))) {
        --b;
      }
      out.joins.push_back({sig[b], i + 1});
    } else if (kind == TokenKind::kOperator &&
               (text == "=" || text == "==" || text == "<>" || text == "!=" || text == "<" ||
                text == "<=" || text == ">" || text == ">=")) {
      out.comparisons.push_back({i, i + 1});
    } else if (kind == TokenKind::kNumber) {
      out.numeric_literals.push_back({i, i + 1});
    } else if (kind == TokenKind::kString) {
      out.string_literals.push_back({i, i + 1});
    } else if (s.is_word(i, "SELECT")) {
      size_t b = k + 1;
      if (b < sig.size() && (s.is_word(sig[b], "DISTINCT") || s.is_word(sig[b], "ALL"))) ++b;
      size_t e = b;
      while (e < sig.size() && s.token_text(sig[e]) != ";" && depth[e] >= depth[k] &&
             !(depth[e] == depth[k] && is_clause_word(s, sig[e]))) {
        ++e;
      }
      if (e > b) out.column_lists.push_back({sig[b], sig[e - 1] + 1});
    } else if ((s.is_word(i, "ORDER") || s.is_word(i, "GROUP")) && k + 1 < sig.size() &&
               s.is_word(sig[k + 1], "BY")) {
      size_t e = k + 2;
      while (e < sig.size() && s.token_text(sig[e]) != ";" && depth[e] >= depth[k] &&
             !(depth[e] == depth[k] &&
               (s.is_word(sig[e], "LIMIT") || s.is_word(sig[e], "HAVING") ||
                s.is_word(sig[e], "ORDER") || s.is_word(sig[e], "WINDOW") ||
                s.is_word(sig[e], "UNION") || s.is_word(sig[e], "EXCEPT") ||
                s.is_word(sig[e], "INTERSECT")))) {
        ++e;
      }
      out.order_group_by.push_back({i, sig[e - 1] + 1});
    } else if (s.is_word(i, "VALUES")) {
      size_t j = k + 1;
      while (j < sig.size() && s.token_text(sig[j]) == "(") {
        const size_t close = match_paren(s, sig, j);
        if (close >= sig.size()) break;
        out.value_tuples.push_back({sig[j], sig[close] + 1});
        j = close + 1;
        if (j < sig.size() && s.token_text(sig[j]) == ",") ++j;
      }
    } else if (s.is_word(i, "TABLE") && k > 0 &&
               (s.is_word(sig[0], "CREATE"))) {
      size_t j = k + 1;
      while (j < sig.size() && s.token_text(sig[j]) != "(" && s.token_text(sig[j]) != ";" &&
             !s.is_word(sig[j], "AS")) {
        ++j;
      }
      if (j < sig.size() && s.token_text(sig[j]) == "(") {
        const size_t close = match_paren(s, sig, j);
        if (close < sig.size()) out.column_lists.push_back({sig[j], sig[close] + 1});
      }
    }
  }
  return out;
}

size_t SelectShape::insertion_point(int rank) const {
  const std::array<std::optional<size_t>, 6> clauses = {where_kw, group_kw, having_kw,
                                                        window_kw, order_kw, limit_kw};
  for (int r = rank; r < 6; ++r) {
    if (clauses[r]) return *clauses[r];
  }
  return end;
}

std::optional<SelectShape> analyze_select(const ClassifiedStatement& s) {
  const auto sig = s.significant_tokens();
  if (sig.empty() || !s.is_word(sig[0], "SELECT")) return std::nullopt;
  SelectShape shape;
  shape.select_kw = sig[0];
  size_t k = 1;
  if (k < sig.size() && (s.is_word(sig[k], "DISTINCT") || s.is_word(sig[k], "ALL"))) {
    shape.quantifier = sig[k];
    ++k;
  }
  const size_t proj_begin = k;
  int depth = 0;
  std::optional<size_t> proj_end;
  for (; k < sig.size(); ++k) {
    const size_t i = sig[k];
    const auto t = s.token_text(i);
    if (t == "(") {
      ++depth;
      continue;
    }
    if (t == ")") {
      --depth;
      continue;
    }
    if (depth != 0) continue;
    if (t == ";") {
      shape.end = i;
      break;
    }
    auto mark = [&](std::optional<size_t>& slot) {
      if (!slot) slot = i;
      if (!proj_end) proj_end = k;
    };
    if (s.is_word(i, "FROM")) {
      mark(shape.from_kw);
    } else if (s.is_word(i, "WHERE")) {
      mark(shape.where_kw);
    } else if (s.is_word(i, "GROUP") && k + 1 < sig.size() && s.is_word(sig[k + 1], "BY")) {
      mark(shape.group_kw);
    } else if (s.is_word(i, "HAVING")) {
      mark(shape.having_kw);
    } else if (s.is_word(i, "WINDOW")) {
      mark(shape.window_kw);
    } else if (s.is_word(i, "ORDER") && k + 1 < sig.size() && s.is_word(sig[k + 1], "BY")) {
      mark(shape.order_kw);
    } else if (s.is_word(i, "LIMIT")) {
      mark(shape.limit_kw);
    } else if (s.is_word(i, "UNION") || s.is_word(i, "EXCEPT") || s.is_word(i, "INTERSECT")) {
      shape.compound = true;
      if (!proj_end) proj_end = k;
    } else if (s.is_word(i, "JOIN") || (t == "," && shape.from_kw && !shape.where_kw &&
                                         !shape.group_kw && !shape.order_kw)) {
      if (shape.from_kw) shape.has_join = true;
    }
  }
  if (k >= sig.size()) shape.end = s.tokens.size() - 1;
  const size_t pe = proj_end.value_or(k);
  if (pe > proj_begin) shape.projection = {sig[proj_begin], sig[pe - 1] + 1};

  if (shape.from_kw) {
    auto it = std::find(sig.begin(), sig.end(), *shape.from_kw);
    size_t fk = static_cast<size_t>(it - sig.begin()) + 1;
    if (fk < sig.size() && s.tokens[sig[fk]].kind == TokenKind::kIdentifier) {
      shape.from_table = normalize_identifier(s.token_text(sig[fk]));
      shape.from_ref = std::string(s.token_text(sig[fk]));
      size_t a = fk + 1;
      if (a < sig.size() && s.is_word(sig[a], "AS")) ++a;
      if (a < sig.size() && s.tokens[sig[a]].kind == TokenKind::kIdentifier &&
          s.token_text(sig[a]) != "." ) {
        shape.from_ref = std::string(s.token_text(sig[a]));
      }
      if (fk + 1 < sig.size() && s.token_text(sig[fk + 1]) == ".") {
        // schema-qualified name; treat as unknown
        shape.from_table.clear();
        shape.from_ref.clear();
      }
    }
  }
  return shape;
}

std::vector<TokenRange> split_top_level(const ClassifiedStatement& s, TokenRange range) {
  std::vector<TokenRange> out;
  int depth = 0;
  size_t start = range.begin;
  for (size_t i = range.begin; i < range.end; ++i) {
    if (!s.significant(i)) continue;
    const auto t = s.token_text(i);
    if (t == "(") ++depth;
    if (t == ")") --depth;
    if (t == "," && depth == 0) {
      out.push_back({start, i});
      start = i + 1;
    }
  }
  if (start < range.end) out.push_back({start, range.end});
  return out;
}

std::string normalize_identifier(std::string_view ident) {
  std::string s(ident);
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '`' && s.back() == '`') ||
                        (s.front() == '[' && s.back() == ']'))) {
    s = s.substr(1, s.size() - 2);
  }
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool ColumnInfo::numeric() const {
  const std::string t = to_upper(type);
  for (const char* k : {"INT", "REAL", "FLOA", "DOUB", "NUM", "DEC", "BOOL"}) {
    if (t.find(k) != std::string::npos) return true;
  }
  return false;
}

bool ColumnInfo::textual() const {
  const std::string t = to_upper(type);
  for (const char* k : {"CHAR", "CLOB", "TEXT"}) {
    if (t.find(k) != std::string::npos) return true;
  }
  return false;
}

const TableInfo* CaseSchema::find(std::string_view name) const {
  const std::string key = normalize_identifier(name);
  for (const auto& t : tables) {
    if (t.name == key) return &t;
  }
  return nullptr;
}

namespace {

bool column_constraint_word(const ClassifiedStatement& s, size_t i) {
  static constexpr std::array<std::string_view, 11> kWords = {
      "PRIMARY", "NOT", "NULL", "UNIQUE", "CHECK", "DEFAULT",
      "COLLATE", "REFERENCES", "GENERATED", "AS", "CONSTRAINT"};
  for (auto w : kWords) {
    if (s.is_word(i, w)) return true;
  }
  return false;
}

std::optional<ColumnInfo> parse_column_def(const ClassifiedStatement& s, TokenRange def,
                                           bool* primary_key) {
  std::vector<size_t> sig;
  for (size_t i = def.begin; i < def.end; ++i) {
    if (s.significant(i)) sig.push_back(i);
  }
  if (sig.empty()) return std::nullopt;
  for (const char* w : {"CONSTRAINT", "PRIMARY", "UNIQUE", "CHECK", "FOREIGN"}) {
    if (s.is_word(sig[0], w)) {
      if (std::string_view(w) == "PRIMARY") *primary_key = true;
      return std::nullopt;
    }
  }
  ColumnInfo col;
  col.name = normalize_identifier(s.token_text(sig[0]));
  size_t k = 1;
  std::string type;
  for (; k < sig.size() && !column_constraint_word(s, sig[k]); ++k) {
    if (!type.empty() && s.token_text(sig[k]) != "(" && s.token_text(sig[k]) != ")" &&
        s.token_text(sig[k]) != "," && type.back() != '(') {
      type += ' ';
    }
    type += s.token_text(sig[k]);
  }
  for (; k < sig.size(); ++k) {
    if (s.is_word(sig[k], "PRIMARY")) *primary_key = true;
  }
  col.type = type;
  return col;
}

}  // namespace

CaseSchema extract_schema(const std::vector<ClassifiedStatement>& statements) {
  CaseSchema schema;
  for (size_t idx = 0; idx < statements.size(); ++idx) {
    const auto& s = statements[idx];
    const auto sig = s.significant_tokens();
    if (sig.size() < 3) continue;
    if (s.is_word(sig[0], "CREATE")) {
      size_t k = 1;
      while (k < sig.size() && (s.is_word(sig[k], "TEMP") || s.is_word(sig[k], "TEMPORARY"))) ++k;
      if (k >= sig.size() || !s.is_word(sig[k], "TABLE")) continue;
      ++k;
      if (k + 2 < sig.size() && s.is_word(sig[k], "IF") && s.is_word(sig[k + 1], "NOT") &&
          s.is_word(sig[k + 2], "EXISTS")) {
        k += 3;
      }
      if (k >= sig.size() || s.tokens[sig[k]].kind != TokenKind::kIdentifier) continue;
      TableInfo table;
      table.name = normalize_identifier(s.token_text(sig[k]));
      table.create_statement = idx;
      ++k;
      if (k >= sig.size() || s.token_text(sig[k]) != "(") continue;
      const size_t close = match_paren(s, sig, k);
      if (close >= sig.size()) continue;
      for (auto def : split_top_level(s, {sig[k] + 1, sig[close]})) {
        bool pk = false;
        if (auto col = parse_column_def(s, def, &pk)) table.columns.push_back(*col);
        table.has_primary_key = table.has_primary_key || pk;
      }
      for (size_t j = close + 1; j + 1 < sig.size(); ++j) {
        if (s.is_word(sig[j], "WITHOUT") && s.is_word(sig[j + 1], "ROWID")) {
          table.without_rowid = true;
        }
      }
      if (!schema.find(table.name)) schema.tables.push_back(std::move(table));
    } else if (s.is_word(sig[0], "ALTER") && s.is_word(sig[1], "TABLE")) {
      const std::string name = normalize_identifier(s.token_text(sig[2]));
      TableInfo* table = nullptr;
      for (auto& t : schema.tables) {
        if (t.name == name) table = &t;
      }
      if (!table) continue;
      size_t k = 3;
      if (k < sig.size() && s.is_word(sig[k], "ADD")) {
        ++k;
        if (k < sig.size() && s.is_word(sig[k], "COLUMN")) ++k;
        if (k < sig.size()) {
          bool pk = false;
          if (auto col = parse_column_def(s, {sig[k], sig.back()}, &pk)) {
            table->columns.push_back(*col);
          }
        }
      } else if (k + 2 < sig.size() && s.is_word(sig[k], "RENAME") && s.is_word(sig[k + 1], "TO")) {
        table->name = normalize_identifier(s.token_text(sig[k + 2]));
      }
    }
  }
  return schema;
}

std::string dml_target_table(const ClassifiedStatement& s) {
  const auto sig = s.significant_tokens();
  for (size_t k = 0; k + 1 < sig.size(); ++k) {
    if (s.is_word(sig[k], "INTO") || (s.is_word(sig[k], "FROM") && s.is_word(sig[0], "DELETE")) ||
        (k == 0 && s.is_word(sig[k], "UPDATE"))) {
      size_t j = k + 1;
      if (k == 0 && s.is_word(sig[0], "UPDATE") && j + 1 < sig.size() && s.is_word(sig[j], "OR")) {
        j += 2;
      }
      if (j >= sig.size() || s.tokens[sig[j]].kind != TokenKind::kIdentifier) return {};
      // schema.table names the table.
      if (j + 2 < sig.size() && s.token_text(sig[j + 1]) == "." &&
          s.tokens[sig[j + 2]].kind == TokenKind::kIdentifier) {
        j += 2;
      }
      return normalize_identifier(s.token_text(sig[j]));
    }
  }
  return {};
}

}  // namespace mist
