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

#ifndef MIST_TESTS_LLM_CORPUS_H_
#define MIST_TESTS_LLM_CORPUS_H_

#include <iterator>
#include <string>
#include <vector>

#include "mist/rng.h"

namespace mist::testing {

// Random statements that stress quoting, then random wrappings around them.
inline std::string random_literal(Rng& rng) {
  static const char* kBits[] = {"a", ";", "--", "/*", "*/", "''", " ", "x", "`", "\""};
  std::string s = "'";
  const int n = static_cast<int>(rng.range(0, 6));
  for (int i = 0; i < n; ++i) s += kBits[rng.below(std::size(kBits))];
  return s + "'";
}

inline std::string random_statement(Rng& rng) {
  const int t = static_cast<int>(rng.below(7));
  const std::string tbl = "t" + std::to_string(rng.below(4));
  switch (t) {
    case 0:
      return "CREATE TABLE " + tbl + " (c0 INTEGER, c1 TEXT DEFAULT " + random_literal(rng) + ");";
    case 1:
      return "INSERT INTO " + tbl + " VALUES (" + std::to_string(rng.range(-9, 99)) + ", " +
             random_literal(rng) + ");";
    case 2:
      return "SELECT c0, " + random_literal(rng) + " FROM " + tbl + " WHERE c1 <> " +
             random_literal(rng) + ";";
    case 3:
      return "UPDATE " + tbl + " SET c1 = " + random_literal(rng) + " WHERE c0 = " +
             std::to_string(rng.below(10)) + ";";
    case 4:
      return "DELETE FROM " + tbl + ";";
    case 5:
      return "SELECT count(*)\n  FROM " + tbl + "\n  GROUP BY c1;";
    default:
      return "CREATE TRIGGER g" + std::to_string(rng.below(9)) + " AFTER INSERT ON " + tbl +
             " BEGIN UPDATE " + tbl + " SET c1 = " + random_literal(rng) + "; END;";
  }
}

// A completion-shaped text: optional prose, optional fences, comments and
// trailing remarks around generated statements, which are returned in `stmts`.
inline std::string llm_output_corpus(Rng& rng, std::vector<std::string>& stmts) {
  static const char* kProse[] = {"Here is the test.", "Sure thing:", "Hope this helps!",
                                 "Notes follow; nothing else.", "this covers joins and views"};
  static const char* kComments[] = {"-- setup", "/* body */", "-- ignore; me", ""};
  stmts.clear();
  const int n = static_cast<int>(rng.range(1, 6));
  for (int i = 0; i < n; ++i) stmts.push_back(random_statement(rng));
  std::string raw;
  const bool fences = rng.chance(0.6);
  if (rng.chance(0.5)) raw += std::string(kProse[rng.below(std::size(kProse))]) + "\n\n";
  if (fences) raw += rng.chance(0.5) ? "```sql\n" : "```\n";
  for (const auto& s : stmts) {
    if (rng.chance(0.3)) raw += std::string(kComments[rng.below(std::size(kComments))]) + "\n";
    raw += s;
    raw += rng.chance(0.2) ? " -- trailing\n" : "\n";
  }
  if (fences) raw += "```\n";
  if (rng.chance(0.5)) raw += std::string("\n") + kProse[rng.below(std::size(kProse))] + "\n";
  return raw;
}

}  // namespace mist::testing

#endif  // MIST_TESTS_LLM_CORPUS_H_
