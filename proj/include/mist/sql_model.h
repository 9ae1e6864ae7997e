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

#ifndef MIST_SQL_MODEL_H_
#define MIST_SQL_MODEL_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mist {

enum class TokenKind {
  kWhitespace,
  kComment,
  kKeyword,
  kIdentifier,  // bare, "quoted", `quoted`, [bracketed], or a bind parameter
  kNumber,
  kString,      // '...' with '' escaping
  kBlob,        // X'...'
  kOperator,
  kPunctuation,
};

struct Token {
  TokenKind kind;
  size_t offset;
  size_t length;
};

// Lossless: concatenating every token's text reproduces the input.
// Throws UnterminatedLiteral for an open string or quoted identifier.
std::vector<Token> tokenize(std::string_view text);

bool is_sql_keyword(std::string_view word);

enum class StatementKind { kDDL, kDML, kDQL, kOther };

const char* to_string(StatementKind kind);

struct ClassifiedStatement {
  std::string text;  // semicolon-terminated
  StatementKind kind;
  std::vector<Token> tokens;

  std::string_view token_text(size_t i) const {
    return std::string_view(text).substr(tokens[i].offset, tokens[i].length);
  }
  // Uppercased text of a keyword or identifier token.
  std::string upper(size_t i) const;
  bool significant(size_t i) const {
    return tokens[i].kind != TokenKind::kWhitespace && tokens[i].kind != TokenKind::kComment;
  }
  // Indexes of non-whitespace, non-comment tokens.
  std::vector<size_t> significant_tokens() const;
  bool is_word(size_t i, std::string_view upper_word) const;
};

// Throws EmptyStatement when the text holds no SQL tokens. A missing
// terminating semicolon is appended.
ClassifiedStatement classify(std::string_view statement_text);

// Half-open token index range inside one statement.
struct TokenRange {
  size_t begin;
  size_t end;

  bool operator==(const TokenRange&) const = default;
};

struct StatementTargets {
  std::vector<TokenRange> joins;           // e.g. "INNER JOIN", "LEFT OUTER JOIN", "JOIN"
  std::vector<TokenRange> comparisons;     // =, ==, <>, !=, <, <=, >, >=
  std::vector<TokenRange> numeric_literals;
  std::vector<TokenRange> string_literals;
  std::vector<TokenRange> column_lists;    // SELECT projections and CREATE TABLE column lists
  std::vector<TokenRange> order_group_by;  // "ORDER BY ..." / "GROUP BY ..." clauses
  std::vector<TokenRange> value_tuples;    // "( ... )" groups after VALUES
};

StatementTargets locate_targets(const ClassifiedStatement& stmt);

// Clause layout of a top-level SELECT (statement starts with SELECT).
// Positions are token indexes; `end` is the index of the terminating ';'.
struct SelectShape {
  size_t select_kw = 0;
  std::optional<size_t> quantifier;  // DISTINCT or ALL
  TokenRange projection{0, 0};
  std::optional<size_t> from_kw;
  std::optional<size_t> where_kw;
  std::optional<size_t> group_kw;
  std::optional<size_t> having_kw;
  std::optional<size_t> window_kw;
  std::optional<size_t> order_kw;
  std::optional<size_t> limit_kw;
  bool compound = false;
  bool has_join = false;
  size_t end = 0;
  // First FROM item when it is a plain table reference.
  std::string from_table;
  std::string from_ref;  // alias if present, else table name

  // Token index before which a new clause of the given rank is inserted.
  // Ranks: where=0, group=1, having=2, window=3, order=4, limit=5.
  size_t insertion_point(int rank) const;
};

std::optional<SelectShape> analyze_select(const ClassifiedStatement& stmt);

// Projection expressions split on top-level commas.
std::vector<TokenRange> split_top_level(const ClassifiedStatement& stmt, TokenRange range);

struct ColumnInfo {
  std::string name;
  std::string type;

  bool numeric() const;
  bool textual() const;
};

struct TableInfo {
  std::string name;
  std::vector<ColumnInfo> columns;
  size_t create_statement = 0;
  bool has_primary_key = false;
  bool without_rowid = false;
};

// Tables declared by CREATE TABLE (and extended by ALTER TABLE ADD COLUMN)
// across an ordered statement list.
struct CaseSchema {
  std::vector<TableInfo> tables;

  const TableInfo* find(std::string_view name) const;
};

CaseSchema extract_schema(const std::vector<ClassifiedStatement>& statements);

// Target table of INSERT/UPDATE/DELETE, or empty.
std::string dml_target_table(const ClassifiedStatement& stmt);

// Strip identifier quoting and fold to lowercase.
std::string normalize_identifier(std::string_view ident);

}  // namespace mist

#endif  // MIST_SQL_MODEL_H_
