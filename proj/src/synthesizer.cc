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

#include "mist/synthesizer.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

#include "mist/error.h"

namespace mist {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSyntax:
      return "Syntax";
    case ErrorKind::kRuntime:
      return "Runtime";
    case ErrorKind::kCrash:
      return "Crash";
  }
  return "Runtime";
}

ErrorMemory::ErrorMemory(size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("error memory capacity must be positive");
}

std::vector<ErrorEntry> ErrorMemory::top(size_t k) const {
  std::vector<ErrorEntry> sorted = entries_;
  std::stable_sort(sorted.begin(), sorted.end(), [](const ErrorEntry& a, const ErrorEntry& b) {
    if (a.occurrence_count != b.occurrence_count) return a.occurrence_count > b.occurrence_count;
    return a.last_seen > b.last_seen;
  });
  if (sorted.size() > k) sorted.resize(k);
  return sorted;
}

void ErrorMemory::record(ErrorKind kind, std::string_view message, std::string_view sql) {
  if (message.empty()) throw ConfigError("error message must be non-empty");
  const std::string normalized = normalize_error_message(message);
  ++clock_;
  for (auto& e : entries_) {
    if (e.kind == kind && e.normalized_message == normalized) {
      ++e.occurrence_count;
      e.last_seen = clock_;
      return;
    }
  }
  entries_.push_back({kind, normalized, 1, std::string(sql), clock_});
  if (entries_.size() > capacity_) {
    auto victim = std::min_element(entries_.begin(), entries_.end(),
                                   [](const ErrorEntry& a, const ErrorEntry& b) {
                                     if (a.occurrence_count != b.occurrence_count) {
                                       return a.occurrence_count < b.occurrence_count;
                                     }
                                     return a.last_seen < b.last_seen;
                                   });
    entries_.erase(victim);
  }
}

std::string normalize_error_message(std::string_view message) {
  std::string out;
  size_t i = 0;
  while (i < message.size()) {
    const char c = message[i];
    if (c == '\'' || c == '"' || c == '`') {
      const size_t close = message.find(c, i + 1);
      if (close != std::string_view::npos) {
        out += c;
        out += '?';
        out += c;
        i = close + 1;
        continue;
      }
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < message.size() && std::isdigit(static_cast<unsigned char>(message[i]))) ++i;
      out += '#';
      continue;
    }
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    ++i;
  }
  while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) out.pop_back();
  return out;
}

void record_error(ErrorMemory& memory, ErrorKind kind, std::string_view message,
                  std::string_view sql) {
  memory.record(kind, message, sql);
}

namespace {

std::string system_prompt(std::string_view dialect) {
  std::string s = "You are a database testing engineer. You write SQL test cases for ";
  s += dialect;
  s += " that exercise its features and expose crashes, parser bugs and executor errors.";
  return s;
}

std::string output_requirements(std::string_view dialect) {
  std::string s = "## Output requirements\n";
  s += "- Return only executable ";
  s += dialect;
  s += " SQL: DDL that creates the schema, DML that populates it, and DQL queries.\n";
  s += "- Terminate every statement with a semicolon.\n";
  s += "- Do not add explanations or comments.\n";
  return s;
}

}  // namespace

PromptBundle build_prompt(const FeatureSelection& selection, const ErrorMemory& memory,
                          size_t k) {
  std::ostringstream user;
  user << "Target DBMS: " << selection.dialect << "\n\n";
  user << "## Features to exercise\n";
  for (size_t i = 0; i < selection.features.size(); ++i) {
    const auto& sf = selection.features[i];
    user << (i + 1) << ". [" << sf.category << "] " << sf.feature.name << ": "
         << sf.feature.description << "\n   Syntax: " << sf.feature.syntax_pattern << "\n";
  }
  user << "\n## Known errors to avoid\n";
  const auto digest = memory.top(k);
  if (digest.empty()) {
    user << "No known errors.\n";
  } else {
    for (const auto& e : digest) {
      user << "- [" << to_string(e.kind) << ", seen " << e.occurrence_count << "x] "
           << e.normalized_message << "\n";
      if (!e.example_sql.empty()) user << "  Failing SQL: " << e.example_sql << "\n";
    }
  }
  user << "\n" << output_requirements(selection.dialect);
  return {system_prompt(selection.dialect), user.str()};
}

PromptBundle build_simple_prompt(std::string_view dialect) {
  std::string user = "Generate a SQL test case for ";
  user += dialect;
  user += ".\n\n";
  user += output_requirements(dialect);
  return {system_prompt(dialect), user};
}

PromptBundle build_mutation_prompt(std::string_view dialect, const TestCase& seed) {
  std::string user = "Mutate this SQL test case for ";
  user += dialect;
  user += " so that it exercises different code paths:\n```sql\n";
  user += seed.sql();
  user += "```\n\n";
  user += output_requirements(dialect);
  return {system_prompt(dialect), user};
}

bool is_allowed_leading_keyword(std::string_view word) {
  static constexpr std::array<std::string_view, 16> kAllowed = {
      "CREATE", "ALTER", "DROP",    "INSERT", "UPDATE",   "DELETE",  "SELECT",  "WITH",
      "PRAGMA", "EXPLAIN", "BEGIN", "COMMIT", "ROLLBACK", "VACUUM", "ANALYZE", "REINDEX"};
  std::string up(word);
  for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return std::find(kAllowed.begin(), kAllowed.end(), up) != kAllowed.end();
}

namespace {

bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || u >= 0x80;
}

bool all_upper(std::string_view w) {
  return std::none_of(w.begin(), w.end(),
                      [](char c) { return std::islower(static_cast<unsigned char>(c)); });
}

// Offset in `line` at or after `pos` where a statement starts, or npos.
// The first word of the segment may be any case; later words only count when
// written in uppercase (prose tends to be lowercase).
size_t find_statement_start(std::string_view line, size_t pos) {
  bool first = true;
  size_t i = pos;
  while (i < line.size()) {
    if (line.compare(i, 2, "--") == 0) return std::string_view::npos;
    if (line.compare(i, 2, "/*") == 0) {
      const size_t close = line.find("*/", i + 2);
      if (close == std::string_view::npos) return std::string_view::npos;
      i = close + 2;
      continue;
    }
    if (!is_word_char(line[i])) {
      if (!std::isspace(static_cast<unsigned char>(line[i]))) first = false;
      ++i;
      continue;
    }
    const size_t start = i;
    while (i < line.size() && is_word_char(line[i])) ++i;
    const auto word = line.substr(start, i - start);
    const bool quoted_before = start > 0 && (line[start - 1] == '\'' || line[start - 1] == '"' ||
                                             line[start - 1] == '`');
    if (!quoted_before && is_allowed_leading_keyword(word) && (first || all_upper(word))) {
      return start;
    }
    first = false;
  }
  return std::string_view::npos;
}

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

class StatementScanner {
 public:
  void feed_line(std::string_view line) {
    size_t i = 0;
    if (!in_stmt_) {
      i = find_statement_start(line, 0);
      if (i == std::string_view::npos) return;
      begin_statement();
    }
    while (i < line.size()) {
      if (!in_stmt_) {
        i = find_statement_start(line, i);
        if (i == std::string_view::npos) return;
        begin_statement();
      }
      i = scan(line, i);
    }
    if (in_stmt_) current_ += '\n';
  }

  // Ends an unterminated statement at a blank line or fence boundary.
  void boundary() {
    if (in_stmt_ && state_ == State::kCode && trigger_depth_ == 0) flush();
  }

  std::vector<std::string> finish() {
    if (in_stmt_) {
      if (state_ == State::kCode || state_ == State::kBlockComment) flush();
      in_stmt_ = false;
    }
    return std::move(out_);
  }

 private:
  enum class State { kCode, kSingle, kDouble, kBacktick, kBracket, kBlockComment };

  void begin_statement() {
    in_stmt_ = true;
    state_ = State::kCode;
    current_.clear();
    words_.clear();
    trigger_ = false;
    trigger_depth_ = 0;
  }

  void flush() {
    std::string body = trim(current_);
    in_stmt_ = false;
    if (body.empty()) return;
    size_t w = 0;
    while (w < body.size() && is_word_char(body[w])) ++w;
    if (!is_allowed_leading_keyword(std::string_view(body).substr(0, w))) return;
    out_.push_back(body + ";");
  }

  void on_word(std::string_view word) {
    std::string up(word);
    for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (words_.size() < 3) {
      words_.push_back(up);
      if (words_.size() >= 2 && words_[0] == "CREATE" &&
          (words_[1] == "TRIGGER" ||
           (words_.size() == 3 && (words_[1] == "TEMP" || words_[1] == "TEMPORARY") &&
            words_[2] == "TRIGGER"))) {
        trigger_ = true;
      }
    }
    if (!trigger_) return;
    if (up == "BEGIN" || up == "CASE") ++trigger_depth_;
    if (up == "END" && trigger_depth_ > 0) --trigger_depth_;
  }

  size_t scan(std::string_view line, size_t i) {
    while (i < line.size()) {
      const char c = line[i];
      switch (state_) {
        case State::kBlockComment:
          if (c == '*' && i + 1 < line.size() && line[i + 1] == '/') {
            state_ = State::kCode;
            current_ += ' ';
            i += 2;
          } else {
            ++i;
          }
          continue;
        case State::kSingle:
        case State::kDouble:
        case State::kBacktick: {
          const char close = state_ == State::kSingle ? '\'' : state_ == State::kDouble ? '"' : '`';
          current_ += c;
          ++i;
          if (c == close) {
            if (i < line.size() && line[i] == close) {
              current_ += close;
              ++i;
            } else {
              state_ = State::kCode;
            }
          }
          continue;
        }
        case State::kBracket:
          current_ += c;
          ++i;
          if (c == ']') state_ = State::kCode;
          continue;
        case State::kCode:
          break;
      }
      if (c == '-' && i + 1 < line.size() && line[i + 1] == '-') return line.size();
      if (c == '/' && i + 1 < line.size() && line[i + 1] == '*') {
        state_ = State::kBlockComment;
        i += 2;
        continue;
      }
      if (c == ';' && trigger_depth_ == 0) {
        flush();
        return i + 1;
      }
      if (c == '\'') state_ = State::kSingle;
      if (c == '"') state_ = State::kDouble;
      if (c == '`') state_ = State::kBacktick;
      if (c == '[') state_ = State::kBracket;
      if (is_word_char(c)) {
        const size_t start = i;
        while (i < line.size() && is_word_char(line[i])) ++i;
        current_.append(line.substr(start, i - start));
        on_word(line.substr(start, i - start));
        continue;
      }
      current_ += c;
      ++i;
    }
    return i;
  }

  bool in_stmt_ = false;
  State state_ = State::kCode;
  std::string current_;
  std::vector<std::string> words_;
  bool trigger_ = false;
  int trigger_depth_ = 0;
  std::vector<std::string> out_;
};

}  // namespace

std::vector<std::string> extract_sql(std::string_view raw) {
  StatementScanner scanner;
  size_t pos = 0;
  while (pos <= raw.size()) {
    size_t nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) nl = raw.size();
    std::string_view line = raw.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::string trimmed = trim(line);
    if (trimmed.rfind("```", 0) == 0) {
      scanner.boundary();
    } else if (trimmed.empty()) {
      scanner.boundary();
    } else {
      scanner.feed_line(line);
    }
    if (nl == raw.size()) break;
    pos = nl + 1;
  }
  auto out = scanner.finish();
  if (out.empty()) throw NoSqlFound("no SQL statements in completion");
  return out;
}

TestCase synthesize_one(const FeatureCatalog& catalog, const ErrorMemory& memory,
                        Backend& backend, Rng& rng, const SynthesisConfig& cfg,
                        std::string id) {
  for (size_t attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    std::optional<FeatureSelection> selection;
    PromptBundle prompt;
    GenerationRequest req;
    switch (cfg.strategy) {
      case SynthesisStrategy::kHierarchical:
        selection = sample_selection(catalog, rng, cfg.sampling);
        prompt = build_prompt(*selection, memory, cfg.digest_k);
        req.selection = selection;
        break;
      case SynthesisStrategy::kRandomFeature:
        selection = sample_random_flat(catalog, rng, cfg.sampling);
        prompt = build_prompt(*selection, memory, cfg.digest_k);
        req.selection = selection;
        break;
      case SynthesisStrategy::kSimple:
        prompt = build_simple_prompt(catalog.dialect);
        req.selection = FeatureSelection{catalog.dialect, {}, ""};
        break;
    }
    req.system_prompt = prompt.system_prompt;
    req.user_prompt = prompt.user_prompt;
    req.temperature = cfg.temperature;
    req.max_tokens = cfg.max_tokens;
    req.seed = rng.next();

    const auto response = backend.generate(req);
    std::vector<std::string> statements;
    try {
      statements = extract_sql(response.raw_text);
    } catch (const NoSqlFound&) {
      continue;
    }
    TestCase tc;
    tc.id = id;
    tc.provenance = Synthesized{selection};
    for (const auto& text : statements) {
      try {
        tc.statements.push_back(classify(text));
      } catch (const Error&) {
        // unclassifiable fragments are dropped like prose
      }
    }
    if (!tc.statements.empty()) return tc;
  }
  throw SynthesisFailure("no SQL extracted after " + std::to_string(cfg.max_retries + 1) +
                         " attempts");
}

}  // namespace mist
