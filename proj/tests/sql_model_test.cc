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

#include <gtest/gtest.h>

#include "mist/error.h"
#include "mist/rng.h"

namespace mist {
namespace {

std::string span(const ClassifiedStatement& s, TokenRange r) {
  const auto& a = s.tokens[r.begin];
  const auto& b = s.tokens[r.end - 1];
  return s.text.substr(a.offset, b.offset + b.length - a.offset);
}

TEST(Classify, Kinds) {
  EXPECT_EQ(classify("CREATE TABLE t (x INTEGER);").kind, StatementKind::kDDL);
  EXPECT_EQ(classify("WITH c AS (SELECT 1) SELECT * FROM c;").kind, StatementKind::kDQL);
  EXPECT_EQ(classify("PRAGMA page_size;").kind, StatementKind::kOther);
  EXPECT_EQ(classify("insert into t values (1)").kind, StatementKind::kDML);
  EXPECT_EQ(classify("  -- lead\nDELETE FROM t;").kind, StatementKind::kDML);
  EXPECT_EQ(classify("ALTER TABLE t ADD COLUMN y;").kind, StatementKind::kDDL);
  EXPECT_EQ(classify("VALUES (1);").kind, StatementKind::kOther);
}

TEST(Classify, AppendsMissingSemicolon) {
  EXPECT_EQ(classify("SELECT 1").text, "SELECT 1;");
  EXPECT_EQ(classify("SELECT 1;").text, "SELECT 1;");
}

TEST(Classify, EmptyInput) {
  EXPECT_THROW(classify(""), EmptyStatement);
  EXPECT_THROW(classify("  -- only a comment\n"), EmptyStatement);
}

TEST(Tokenize, DoubledQuoteEscape) {
  const auto s = classify("SELECT 'a''b';");
  const auto t = locate_targets(s);
  ASSERT_EQ(t.string_literals.size(), 1u);
  EXPECT_EQ(span(s, t.string_literals[0]), "'a''b'");
}

TEST(Tokenize, Unterminated) {
  EXPECT_THROW(tokenize("SELECT 'abc"), UnterminatedLiteral);
  EXPECT_THROW(tokenize("SELECT \"abc"), UnterminatedLiteral);
  EXPECT_NO_THROW(tokenize(""));
}

TEST(Tokenize, LosslessOnRandomText) {
  static const char* kPieces[] = {"SELECT", " ", "\n", "'x''y'", "\"q\"", "[b]", "`c`", "12",
                                  "3.5e-2", "x'0A'", "--c\n", "/*k*/", "<=", "||", "(", ")",
                                  ",", ";", "name", "?1", ":v", "!=", "-", "."};
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    std::string text;
    const int n = static_cast<int>(rng.range(0, 20));
    for (int k = 0; k < n; ++k) text += kPieces[rng.below(std::size(kPieces))];
    std::string joined;
    for (const auto& t : tokenize(text)) joined += text.substr(t.offset, t.length);
    ASSERT_EQ(joined, text);
  }
}

TEST(Targets, JoinKeyword) {
  const auto s = classify("SELECT * FROM a INNER JOIN b ON a.x=b.x;");
  const auto t = locate_targets(s);
  ASSERT_EQ(t.joins.size(), 1u);
  EXPECT_EQ(span(s, t.joins[0]), "INNER JOIN");
  ASSERT_EQ(t.comparisons.size(), 1u);
}

TEST(Targets, LiteralIsNotAJoin) {
  EXPECT_TRUE(locate_targets(classify("SELECT 'INNER JOIN';")).joins.empty());
}

TEST(Targets, NumericLiteralsAndTuples) {
  const auto s = classify("INSERT INTO t VALUES (1, 2.5);");
  const auto t = locate_targets(s);
  EXPECT_EQ(t.numeric_literals.size(), 2u);
  ASSERT_EQ(t.value_tuples.size(), 1u);
  EXPECT_EQ(span(s, t.value_tuples[0]), "(1, 2.5)");
}

TEST(Targets, OrderAndGroupBy) {
  const auto s = classify("SELECT a, count(*) FROM t GROUP BY a ORDER BY a DESC;");
  const auto t = locate_targets(s);
  EXPECT_EQ(t.order_group_by.size(), 2u);
  EXPECT_FALSE(t.column_lists.empty());
}

TEST(SelectShape, Clauses) {
  const auto s = classify("SELECT DISTINCT a, b FROM t AS x WHERE a > 1 ORDER BY b LIMIT 3;");
  const auto shape = analyze_select(s);
  ASSERT_TRUE(shape.has_value());
  EXPECT_TRUE(shape->quantifier.has_value());
  EXPECT_TRUE(shape->where_kw.has_value());
  EXPECT_TRUE(shape->order_kw.has_value());
  EXPECT_TRUE(shape->limit_kw.has_value());
  EXPECT_FALSE(shape->group_kw.has_value());
  EXPECT_EQ(shape->from_table, "t");
  EXPECT_EQ(shape->from_ref, "x");
  EXPECT_EQ(split_top_level(s, shape->projection).size(), 2u);
  EXPECT_EQ(shape->insertion_point(1), *shape->order_kw);
  EXPECT_FALSE(analyze_select(classify("INSERT INTO t VALUES (1);")).has_value());
}

TEST(SelectShape, CompoundAndJoin) {
  const auto shape = analyze_select(classify("SELECT a FROM t JOIN u ON t.a = u.a UNION SELECT 1;"));
  ASSERT_TRUE(shape.has_value());
  EXPECT_TRUE(shape->compound);
  EXPECT_TRUE(shape->has_join);
}

TEST(Schema, TablesColumnsAndAlter) {
  std::vector<ClassifiedStatement> stmts = {
      classify("CREATE TABLE t0 (c0 INTEGER PRIMARY KEY, c1 TEXT, c2 REAL);"),
      classify("CREATE TABLE \"T1\" (a, b BLOB) WITHOUT ROWID;"),
      classify("ALTER TABLE t0 ADD COLUMN c3 VARCHAR(10);"),
      classify("INSERT INTO t0 (c0) VALUES (1);")};
  const auto schema = extract_schema(stmts);
  ASSERT_EQ(schema.tables.size(), 2u);
  const auto* t0 = schema.find("T0");
  ASSERT_NE(t0, nullptr);
  EXPECT_EQ(t0->columns.size(), 4u);
  EXPECT_TRUE(t0->has_primary_key);
  EXPECT_TRUE(t0->columns[0].numeric());
  EXPECT_TRUE(t0->columns[3].textual());
  const auto* t1 = schema.find("t1");
  ASSERT_NE(t1, nullptr);
  EXPECT_TRUE(t1->without_rowid);
  EXPECT_EQ(t1->create_statement, 1u);
}

TEST(Schema, DmlTargetsAndIdentifiers) {
  EXPECT_EQ(dml_target_table(classify("INSERT OR REPLACE INTO main.t0 VALUES (1);")), "t0");
  EXPECT_EQ(dml_target_table(classify("UPDATE \"Big\" SET a = 1;")), "big");
  EXPECT_EQ(dml_target_table(classify("DELETE FROM [x];")), "x");
  EXPECT_EQ(dml_target_table(classify("SELECT 1;")), "");
  EXPECT_EQ(normalize_identifier("`MiXed`"), "mixed");
}

}  // namespace
}  // namespace mist
