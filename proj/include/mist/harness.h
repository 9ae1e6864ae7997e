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

#ifndef MIST_HARNESS_H_
#define MIST_HARNESS_H_

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "mist/test_case.h"

namespace mist {

enum class StatementStatus { kOk, kSyntaxError, kRuntimeError, kCrash, kTimeout };

const char* to_string(StatementStatus status);

struct StatementOutcome {
  StatementStatus status = StatementStatus::kOk;
  int64_t rows = 0;  // rows returned for queries, rows changed otherwise
  std::string message;

  bool operator==(const StatementOutcome&) const = default;
};

// One entry per attempted statement; execution stops after a crash or timeout.
struct ExecutionReport {
  std::vector<StatementOutcome> outcomes;
  std::chrono::milliseconds wall{0};
};

enum class OutcomeClass { kPass, kSyntaxFail, kRuntimeFail, kCrashFail, kTimeoutFail };

const char* to_string(OutcomeClass c);

// Pass iff every statement is Ok; otherwise the most severe failure present
// (crash > timeout > runtime > syntax).
OutcomeClass classify_outcome(const ExecutionReport& report);

class Driver {
 public:
  virtual ~Driver() = default;
  // Runs the case against a fresh, empty database.
  virtual ExecutionReport execute_case(const TestCase& tc, std::chrono::milliseconds timeout) = 0;
  virtual std::string name() const = 0;
};

struct SqliteDriverOptions {
  // Registers mist_crash() (aborts the engine process) and mist_hang()
  // (never returns) for exercising crash and timeout handling.
  bool fault_functions = false;
};

// Linked SQLite engine, run in a supervised child process per case so that
// engine aborts surface as Crash outcomes. Prepare-time failures whose
// message is a parse diagnostic are SyntaxError; other failures are
// RuntimeError.
class SqliteDriver : public Driver {
 public:
  explicit SqliteDriver(SqliteDriverOptions options = {});
  ExecutionReport execute_case(const TestCase& tc, std::chrono::milliseconds timeout) override;
  std::string name() const override { return "sqlite"; }

 private:
  SqliteDriverOptions options_;
};

bool is_sqlite_syntax_message(const std::string& message);

struct ExternalDriverConfig {
  std::vector<std::string> command;
  std::string sql_via = "stdin";
  std::vector<int> crash_exit_codes;
  // Case-insensitive substrings marking an error line as a syntax error.
  std::vector<std::string> syntax_patterns = {"syntax error", "parse error", "parser error"};
  // Case-insensitive substrings marking an output line as an error report.
  std::vector<std::string> error_patterns = {"error"};

  static ExternalDriverConfig from_json(const nlohmann::json& j);
};

// Wraps a DBMS command-line client that reads SQL on standard input, one
// statement per line. Error lines that mention "line N" are attributed to
// statement N; unattributed errors go to the last statement. Death by signal
// or a listed exit code is a Crash.
class ExternalProcessDriver : public Driver {
 public:
  explicit ExternalProcessDriver(ExternalDriverConfig cfg);
  ExecutionReport execute_case(const TestCase& tc, std::chrono::milliseconds timeout) override;
  std::string name() const override;

 private:
  ExternalDriverConfig cfg_;
};

}  // namespace mist

#endif  // MIST_HARNESS_H_
