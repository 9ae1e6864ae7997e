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

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sqlite3.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <optional>
#include <regex>
#include <sstream>

#include "mist/error.h"

namespace mist {

using Clock = std::chrono::steady_clock;

const char* to_string(StatementStatus status) {
  switch (status) {
    case StatementStatus::kOk:
      return "Ok";
    case StatementStatus::kSyntaxError:
      return "SyntaxError";
    case StatementStatus::kRuntimeError:
      return "RuntimeError";
    case StatementStatus::kCrash:
      return "Crash";
    case StatementStatus::kTimeout:
      return "Timeout";
  }
  return "Ok";
}

const char* to_string(OutcomeClass c) {
  switch (c) {
    case OutcomeClass::kPass:
      return "Pass";
    case OutcomeClass::kSyntaxFail:
      return "SyntaxFail";
    case OutcomeClass::kRuntimeFail:
      return "RuntimeFail";
    case OutcomeClass::kCrashFail:
      return "CrashFail";
    case OutcomeClass::kTimeoutFail:
      return "TimeoutFail";
  }
  return "Pass";
}

OutcomeClass classify_outcome(const ExecutionReport& report) {
  auto has = [&](StatementStatus s) {
    return std::any_of(report.outcomes.begin(), report.outcomes.end(),
                       [s](const StatementOutcome& o) { return o.status == s; });
  };
  if (has(StatementStatus::kCrash)) return OutcomeClass::kCrashFail;
  if (has(StatementStatus::kTimeout)) return OutcomeClass::kTimeoutFail;
  if (has(StatementStatus::kRuntimeError)) return OutcomeClass::kRuntimeFail;
  if (has(StatementStatus::kSyntaxError)) return OutcomeClass::kSyntaxFail;
  return OutcomeClass::kPass;
}

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool write_all(int fd, const std::string& data) {
  size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    off += static_cast<size_t>(n);
  }
  return true;
}

struct ChildExit {
  std::string output;
  bool timed_out = false;
  int status = 0;
};

// Pumps `input` into `in_fd` (if >= 0) and drains `out_fd` until the child
// exits or the deadline passes, in which case the child's process group is
// killed.
ChildExit supervise(pid_t pid, int out_fd, int in_fd, const std::string& input,
                    Clock::time_point deadline) {
  ChildExit result;
  size_t written = 0;
  if (in_fd >= 0 && input.empty()) {
    ::close(in_fd);
    in_fd = -1;
  }
  bool out_open = true;
  char buf[4096];
  while (out_open || in_fd >= 0) {
    const auto now = Clock::now();
    if (now >= deadline) {
      result.timed_out = true;
      break;
    }
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    pollfd fds[2];
    nfds_t nfds = 0;
    int out_idx = -1, in_idx = -1;
    if (out_open) {
      fds[nfds] = {out_fd, POLLIN, 0};
      out_idx = static_cast<int>(nfds++);
    }
    if (in_fd >= 0) {
      fds[nfds] = {in_fd, POLLOUT, 0};
      in_idx = static_cast<int>(nfds++);
    }
    const int rc = ::poll(fds, nfds, static_cast<int>(std::max<int64_t>(1, remaining)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (out_idx >= 0 && fds[out_idx].revents) {
      const ssize_t n = ::read(out_fd, buf, sizeof buf);
      if (n > 0) {
        result.output.append(buf, static_cast<size_t>(n));
      } else if (n == 0 || errno != EINTR) {
        out_open = false;
      }
    }
    if (in_idx >= 0 && fds[in_idx].revents) {
      if (fds[in_idx].revents & (POLLERR | POLLHUP)) {
        ::close(in_fd);
        in_fd = -1;
      } else {
        const ssize_t n = ::write(in_fd, input.data() + written, input.size() - written);
        if (n > 0) written += static_cast<size_t>(n);
        if ((n < 0 && errno != EINTR && errno != EAGAIN) || written == input.size()) {
          ::close(in_fd);
          in_fd = -1;
        }
      }
    }
  }
  if (in_fd >= 0) ::close(in_fd);
  if (result.timed_out) {
    ::kill(-pid, SIGKILL);
    ::kill(pid, SIGKILL);
    ::waitpid(pid, &result.status, 0);
    return result;
  }
  // Output closed; reap the child within the remaining budget.
  while (true) {
    const pid_t r = ::waitpid(pid, &result.status, WNOHANG);
    if (r == pid) break;
    if (r < 0 && errno != EINTR) break;
    if (Clock::now() >= deadline) {
      result.timed_out = true;
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &result.status, 0);
      break;
    }
    ::usleep(1000);
  }
  return result;
}

void fault_crash(sqlite3_context*, int, sqlite3_value**) { ::abort(); }
void fault_hang(sqlite3_context*, int, sqlite3_value**) {
  for (;;) ::pause();
}

// Runs in the forked child: one JSON line per statement on `fd`.
[[noreturn]] void run_sqlite_child(const TestCase& tc, int fd, const SqliteDriverOptions& opts) {
  sqlite3* db = nullptr;
  if (sqlite3_open(":memory:", &db) != SQLITE_OK) ::_exit(3);
  if (opts.fault_functions) {
    sqlite3_create_function(db, "mist_crash", 0, SQLITE_UTF8, nullptr, fault_crash, nullptr,
                            nullptr);
    sqlite3_create_function(db, "mist_hang", 0, SQLITE_UTF8, nullptr, fault_hang, nullptr,
                            nullptr);
  }
  for (const auto& stmt : tc.statements) {
    StatementOutcome outcome;
    const char* tail = stmt.text.c_str();
    while (tail && *tail) {
      sqlite3_stmt* prepared = nullptr;
      const char* next = nullptr;
      if (sqlite3_prepare_v2(db, tail, -1, &prepared, &next) != SQLITE_OK) {
        outcome.message = sqlite3_errmsg(db);
        outcome.status = is_sqlite_syntax_message(outcome.message)
                             ? StatementStatus::kSyntaxError
                             : StatementStatus::kRuntimeError;
        break;
      }
      tail = next;
      if (!prepared) continue;  // whitespace or comment only
      const bool returns_rows = sqlite3_column_count(prepared) > 0;
      int64_t rows = 0;
      int rc;
      while ((rc = sqlite3_step(prepared)) == SQLITE_ROW) ++rows;
      if (rc != SQLITE_DONE) {
        outcome.status = StatementStatus::kRuntimeError;
        outcome.message = sqlite3_errmsg(db);
        sqlite3_finalize(prepared);
        break;
      }
      outcome.rows = returns_rows ? rows : sqlite3_changes(db);
      sqlite3_finalize(prepared);
    }
    nlohmann::json line = {{"s", static_cast<int>(outcome.status)},
                           {"r", outcome.rows},
                           {"m", outcome.message}};
    if (!write_all(fd, line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) +
                           "\n")) {
      ::_exit(4);
    }
  }
  sqlite3_close(db);
  ::_exit(0);
}

std::string describe_status(int status) {
  if (WIFSIGNALED(status)) {
    return std::string("terminated by signal ") + std::to_string(WTERMSIG(status)) + " (" +
           strsignal(WTERMSIG(status)) + ")";
  }
  return "exited with code " + std::to_string(WEXITSTATUS(status));
}

}  // namespace

bool is_sqlite_syntax_message(const std::string& message) {
  const std::string m = lower(message);
  return m.find("syntax error") != std::string::npos ||
         m.find("incomplete input") != std::string::npos ||
         m.find("unrecognized token") != std::string::npos;
}

SqliteDriver::SqliteDriver(SqliteDriverOptions options) : options_(options) {}

ExecutionReport SqliteDriver::execute_case(const TestCase& tc, std::chrono::milliseconds timeout) {
  ExecutionReport report;
  const auto start = Clock::now();
  if (tc.statements.empty()) return report;
  if (timeout.count() <= 0) {
    report.outcomes.push_back({StatementStatus::kTimeout, 0, "timeout of 0 ms"});
    return report;
  }
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw DriverUnavailable("pipe failed: " + std::string(strerror(errno)));
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    throw DriverUnavailable("fork failed: " + std::string(strerror(errno)));
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::close(fds[0]);
    run_sqlite_child(tc, fds[1], options_);
  }
  ::close(fds[1]);
  const ChildExit exit = supervise(pid, fds[0], -1, "", start + timeout);
  ::close(fds[0]);

  std::istringstream lines(exit.output);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      report.outcomes.push_back({static_cast<StatementStatus>(j.at("s").get<int>()),
                                 j.at("r").get<int64_t>(), j.at("m").get<std::string>()});
    } catch (const nlohmann::json::exception&) {
      break;  // torn final line from a dying child
    }
  }
  if (report.outcomes.size() > tc.statements.size()) report.outcomes.resize(tc.statements.size());
  if (report.outcomes.size() < tc.statements.size()) {
    if (exit.timed_out) {
      report.outcomes.push_back(
          {StatementStatus::kTimeout, 0, "timeout after " + std::to_string(timeout.count()) + " ms"});
    } else {
      report.outcomes.push_back({StatementStatus::kCrash, 0, describe_status(exit.status)});
    }
  }
  report.wall = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
  return report;
}

ExternalDriverConfig ExternalDriverConfig::from_json(const nlohmann::json& j) {
  ExternalDriverConfig cfg;
  if (!j.contains("command") || !j["command"].is_array() || j["command"].empty()) {
    throw ConfigError("external driver needs a non-empty command array");
  }
  cfg.command = j["command"].get<std::vector<std::string>>();
  cfg.sql_via = j.value("sql_via", std::string("stdin"));
  if (cfg.sql_via != "stdin") throw ConfigError("external driver supports sql_via=stdin only");
  cfg.crash_exit_codes = j.value("crash_exit_codes", std::vector<int>{});
  if (j.contains("syntax_patterns")) {
    cfg.syntax_patterns = j["syntax_patterns"].get<std::vector<std::string>>();
  }
  if (j.contains("error_patterns")) {
    cfg.error_patterns = j["error_patterns"].get<std::vector<std::string>>();
  }
  return cfg;
}

ExternalProcessDriver::ExternalProcessDriver(ExternalDriverConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.command.empty()) throw ConfigError("external driver needs a command");
  ::signal(SIGPIPE, SIG_IGN);
}

std::string ExternalProcessDriver::name() const { return "external:" + cfg_.command.front(); }

ExecutionReport ExternalProcessDriver::execute_case(const TestCase& tc,
                                                    std::chrono::milliseconds timeout) {
  ExecutionReport report;
  const auto start = Clock::now();
  if (tc.statements.empty()) return report;
  if (timeout.count() <= 0) {
    report.outcomes.push_back({StatementStatus::kTimeout, 0, "timeout of 0 ms"});
    return report;
  }
  std::string input;
  for (const auto& s : tc.statements) {
    std::string flat = s.text;
    std::replace(flat.begin(), flat.end(), '\n', ' ');
    std::replace(flat.begin(), flat.end(), '\r', ' ');
    input += flat + "\n";
  }

  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0 || ::pipe2(out_pipe, O_CLOEXEC) != 0 ||
      ::pipe2(err_pipe, O_CLOEXEC) != 0) {
    throw DriverUnavailable("pipe failed: " + std::string(strerror(errno)));
  }
  std::vector<char*> argv;
  for (auto& a : cfg_.command) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) throw DriverUnavailable("fork failed: " + std::string(strerror(errno)));
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(out_pipe[1], STDERR_FILENO);
    ::execvp(argv[0], argv.data());
    const int err = errno;
    (void)!::write(err_pipe[1], &err, sizeof err);
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  int exec_errno = 0;
  const bool exec_failed = ::read(err_pipe[0], &exec_errno, sizeof exec_errno) == sizeof exec_errno;
  ::close(err_pipe[0]);
  if (exec_failed) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::waitpid(pid, nullptr, 0);
    throw DriverUnavailable("cannot execute '" + cfg_.command.front() +
                            "': " + strerror(exec_errno));
  }
  ::fcntl(in_pipe[1], F_SETFL, O_NONBLOCK);
  const ChildExit exit = supervise(pid, out_pipe[0], in_pipe[1], input, start + timeout);
  ::close(out_pipe[0]);

  const size_t n = tc.statements.size();
  report.outcomes.assign(n, StatementOutcome{});
  static const std::regex kLineRef(R"((?:line\s+|:)(\d+)(?::|\b))", std::regex::icase);
  auto contains_any = [](const std::string& hay, const std::vector<std::string>& needles) {
    const std::string h = lower(hay);
    return std::any_of(needles.begin(), needles.end(),
                       [&](const std::string& p) { return h.find(lower(p)) != std::string::npos; });
  };
  size_t last_reported = 0;
  std::istringstream lines(exit.output);
  std::string line;
  while (std::getline(lines, line)) {
    if (!contains_any(line, cfg_.error_patterns)) continue;
    size_t idx = n - 1;
    std::smatch m;
    if (std::regex_search(line, m, kLineRef)) {
      const long ln = std::stol(m[1].str());
      if (ln >= 1 && static_cast<size_t>(ln) <= n) idx = static_cast<size_t>(ln - 1);
    }
    auto& o = report.outcomes[idx];
    if (o.status == StatementStatus::kOk) {
      o.status = contains_any(line, cfg_.syntax_patterns) ? StatementStatus::kSyntaxError
                                                          : StatementStatus::kRuntimeError;
      o.message = line;
    }
    last_reported = std::max(last_reported, idx);
  }

  const bool crashed =
      !exit.timed_out &&
      (WIFSIGNALED(exit.status) ||
       (WIFEXITED(exit.status) &&
        std::find(cfg_.crash_exit_codes.begin(), cfg_.crash_exit_codes.end(),
                  WEXITSTATUS(exit.status)) != cfg_.crash_exit_codes.end()));
  if (exit.timed_out || crashed) {
    // Attribute the failure to the last statement the client reported on.
    const size_t at = last_reported;
    report.outcomes.resize(at + 1);
    report.outcomes[at] = exit.timed_out
                              ? StatementOutcome{StatementStatus::kTimeout, 0,
                                                 "timeout after " + std::to_string(timeout.count()) + " ms"}
                              : StatementOutcome{StatementStatus::kCrash, 0, describe_status(exit.status)};
  }
  report.wall = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
  return report;
}

}  // namespace mist
