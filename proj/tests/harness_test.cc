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

#include "mist/harness.h"

#include <gtest/gtest.h>
#include <sqlite3.h>

#include "mist/error.h"

namespace mist {
namespace {

using namespace std::chrono_literals;

// Independent oracle: runs the statements directly through the SQLite C API
// and records (ok, rows, message) per statement.
struct Direct {
  bool ok;
  int64_t rows;
  std::string message;
};

std::vector<Direct> run_directly(const std::vector<std::string>& statements) {
  sqlite3* db = nullptr;
  sqlite3_open(":memory:", &db);
  std::vector<Direct> out;
  for (const auto& sql : statements) {
    sqlite3_stmt* st = nullptr;
    if (sqlite3_prepare_v2(db, sql.c_str(), -1, &st, nullptr) != SQLITE_OK) {
      out.push_back({false, 0, sqlite3_errmsg(db)});
      continue;
    }
    int64_t returned = 0;
    int rc;
    while ((rc = sqlite3_step(st)) == SQLITE_ROW) ++returned;
    const bool query = sqlite3_column_count(st) > 0;
    if (rc != SQLITE_DONE) {
      out.push_back({false, 0, sqlite3_errmsg(db)});
    } else {
      out.push_back({true, query ? returned : sqlite3_changes(db), ""});
    }
    sqlite3_finalize(st);
  }
  sqlite3_close(db);
  return out;
}

TestCase case_of(const std::vector<std::string>& texts) {
  return make_case("h", texts, Synthesized{});
}

TEST(Sqlite, MatchesDirectExecution) {
  const std::vector<std::string> sql = {"CREATE TABLE t(x INTEGER);", "INSERT INTO t VALUES (1);",
                                        "SELECT x FROM t;"};
  const auto expected = run_directly(sql);
  SqliteDriver d;
  const auto report = d.execute_case(case_of(sql), 10s);
  ASSERT_EQ(report.outcomes.size(), 3u);
  for (size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(report.outcomes[i].status, StatementStatus::kOk);
    EXPECT_EQ(report.outcomes[i].rows, expected[i].rows) << i;
  }
  EXPECT_EQ(report.outcomes[1].rows, 1);
  EXPECT_EQ(report.outcomes[2].rows, 1);
  EXPECT_EQ(classify_outcome(report), OutcomeClass::kPass);
}

TEST(Sqlite, SyntaxError) {
  const auto expected = run_directly({"SELEC 1;"});
  ASSERT_FALSE(expected[0].ok);
  SqliteDriver d;
  const auto report = d.execute_case(case_of({"SELEC 1;"}), 10s);
  ASSERT_EQ(report.outcomes.size(), 1u);
  EXPECT_EQ(report.outcomes[0].status, StatementStatus::kSyntaxError);
  EXPECT_EQ(report.outcomes[0].message, expected[0].message);
  EXPECT_NE(report.outcomes[0].message.find("syntax error"), std::string::npos);
}

TEST(Sqlite, RuntimeErrorsDoNotStopTheCase) {
  SqliteDriver d;
  const auto report = d.execute_case(
      case_of({"CREATE TABLE t(x INTEGER PRIMARY KEY);", "INSERT INTO t VALUES (1);",
               "INSERT INTO t VALUES (1);", "SELECT * FROM missing;", "SELECT 1;"}),
      10s);
  ASSERT_EQ(report.outcomes.size(), 5u);
  EXPECT_EQ(report.outcomes[2].status, StatementStatus::kRuntimeError);
  EXPECT_EQ(report.outcomes[3].status, StatementStatus::kRuntimeError);
  EXPECT_EQ(report.outcomes[4].status, StatementStatus::kOk);
  EXPECT_EQ(classify_outcome(report), OutcomeClass::kRuntimeFail);
}

TEST(Sqlite, EachCaseStartsFromAnEmptyDatabase) {
  SqliteDriver d;
  d.execute_case(case_of({"CREATE TABLE t(x);"}), 10s);
  const auto report = d.execute_case(case_of({"CREATE TABLE t(x);"}), 10s);
  EXPECT_EQ(report.outcomes[0].status, StatementStatus::kOk);
}

TEST(Sqlite, ZeroTimeout) {
  SqliteDriver d;
  const auto report = d.execute_case(case_of({"SELECT 1;"}), 0ms);
  ASSERT_FALSE(report.outcomes.empty());
  EXPECT_EQ(report.outcomes.back().status, StatementStatus::kTimeout);
  EXPECT_EQ(classify_outcome(report), OutcomeClass::kTimeoutFail);
}

TEST(Sqlite, EngineAbortIsACrash) {
  SqliteDriver d({true});
  const auto report = d.execute_case(case_of({"SELECT 1;", "SELECT mist_crash();", "SELECT 2;"}), 10s);
  ASSERT_EQ(report.outcomes.size(), 2u);
  EXPECT_EQ(report.outcomes[0].status, StatementStatus::kOk);
  EXPECT_EQ(report.outcomes[1].status, StatementStatus::kCrash);
  EXPECT_EQ(classify_outcome(report), OutcomeClass::kCrashFail);
}

TEST(Sqlite, HangIsATimeout) {
  SqliteDriver d({true});
  const auto start = std::chrono::steady_clock::now();
  const auto report = d.execute_case(case_of({"SELECT mist_hang();"}), 300ms);
  EXPECT_LT(std::chrono::steady_clock::now() - start, 5s);
  ASSERT_EQ(report.outcomes.size(), 1u);
  EXPECT_EQ(report.outcomes[0].status, StatementStatus::kTimeout);
}

TEST(Sqlite, SyntaxMessages) {
  EXPECT_TRUE(is_sqlite_syntax_message("near \"SELEC\": syntax error"));
  EXPECT_TRUE(is_sqlite_syntax_message("incomplete input"));
  EXPECT_TRUE(is_sqlite_syntax_message("unrecognized token: \"@\""));
  EXPECT_FALSE(is_sqlite_syntax_message("no such table: t"));
}

TEST(Classify, SeverityOrder) {
  using S = StatementStatus;
  auto report = [](std::vector<S> statuses) {
    ExecutionReport r;
    for (auto s : statuses) r.outcomes.push_back({s, 0, ""});
    return r;
  };
  EXPECT_EQ(classify_outcome(report({S::kOk, S::kOk})), OutcomeClass::kPass);
  EXPECT_EQ(classify_outcome(report({S::kOk, S::kSyntaxError, S::kRuntimeError})),
            OutcomeClass::kRuntimeFail);
  EXPECT_EQ(classify_outcome(report({S::kSyntaxError})), OutcomeClass::kSyntaxFail);
  EXPECT_EQ(classify_outcome(report({S::kTimeout, S::kCrash, S::kOk})), OutcomeClass::kCrashFail);
  EXPECT_EQ(classify_outcome(report({S::kRuntimeError, S::kTimeout})), OutcomeClass::kTimeoutFail);
}

ExternalDriverConfig fake_client() {
  ExternalDriverConfig cfg;
  cfg.command = {MIST_FAKE_DBMS};
  cfg.crash_exit_codes = {7};
  return cfg;
}

TEST(External, AttributesErrorsByLine) {
  ExternalProcessDriver d(fake_client());
  const auto report = d.execute_case(
      case_of({"SELECT 1;", "SELECT mist_syntax;", "SELECT mist_runtime;", "SELECT 4;"}), 10s);
  ASSERT_EQ(report.outcomes.size(), 4u);
  EXPECT_EQ(report.outcomes[0].status, StatementStatus::kOk);
  EXPECT_EQ(report.outcomes[1].status, StatementStatus::kSyntaxError);
  EXPECT_EQ(report.outcomes[2].status, StatementStatus::kRuntimeError);
  EXPECT_EQ(report.outcomes[3].status, StatementStatus::kOk);
}

TEST(External, SignalAndListedExitCodeAreCrashes) {
  ExternalProcessDriver d(fake_client());
  auto report = d.execute_case(case_of({"SELECT mist_abort;"}), 10s);
  EXPECT_EQ(classify_outcome(report), OutcomeClass::kCrashFail);
  report = d.execute_case(case_of({"SELECT mist_exit7;"}), 10s);
  EXPECT_EQ(classify_outcome(report), OutcomeClass::kCrashFail);
}

TEST(External, HangIsATimeout) {
  ExternalProcessDriver d(fake_client());
  const auto report = d.execute_case(case_of({"SELECT mist_sleep;"}), 300ms);
  EXPECT_EQ(classify_outcome(report), OutcomeClass::kTimeoutFail);
}

TEST(External, MissingBinaryIsDriverUnavailable) {
  ExternalDriverConfig cfg;
  cfg.command = {"/nonexistent/mist-dbms"};
  ExternalProcessDriver d(cfg);
  EXPECT_THROW(d.execute_case(case_of({"SELECT 1;"}), 1s), DriverUnavailable);
}

TEST(External, ConfigFromJson) {
  const auto cfg = ExternalDriverConfig::from_json(
      nlohmann::json::parse(R"({"command": ["duckdb"], "crash_exit_codes": [134]})"));
  EXPECT_EQ(cfg.command, std::vector<std::string>{"duckdb"});
  EXPECT_EQ(cfg.crash_exit_codes, std::vector<int>{134});
  EXPECT_THROW(ExternalDriverConfig::from_json(nlohmann::json::parse(R"({"command": []})")),
               ConfigError);
}

}  // namespace
}  // namespace mist
