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

#ifndef MIST_TESTS_SEED_CORPUS_H_
#define MIST_TESTS_SEED_CORPUS_H_

#include <string>
#include <vector>

#include "mist/rng.h"
#include "mist/test_case.h"

namespace mist::testing {

// Deterministic corpus of small, valid SQLite cases: one or two tables,
// multi-row inserts with numeric and text values, optional UPDATE/DELETE,
// and a mix of filtered, ordered, joined and aggregate queries.
inline std::vector<TestCase> seed_corpus(size_t n, uint64_t seed = 7) {
  Rng rng(seed);
  std::vector<TestCase> out;
  const std::vector<std::string> words = {"'alpha'", "'beta'", "'gamma'", "'delta'", "NULL"};
  for (size_t k = 0; k < n; ++k) {
    const std::string a = "t" + std::to_string(k % 7);
    const std::string b = "u" + std::to_string(k % 5);
    const bool two = rng.chance(0.5);
    std::vector<std::string> sql;
    sql.push_back("CREATE TABLE " + a + " (id INTEGER PRIMARY KEY, name TEXT, score REAL, qty INTEGER);");
    std::string ins = "INSERT INTO " + a + " (id, name, score, qty) VALUES ";
    const int rows = static_cast<int>(rng.range(1, 4));
    for (int r = 0; r < rows; ++r) {
      if (r) ins += ", ";
      ins += "(" + std::to_string(r + 1) + ", " + words[rng.below(words.size())] + ", " +
             std::to_string(rng.range(0, 99)) + ".5, " + std::to_string(rng.range(-5, 50)) + ")";
    }
    sql.push_back(ins + ";");
    if (two) {
      sql.push_back("CREATE TABLE " + b + " (id INTEGER PRIMARY KEY, ref INTEGER, label TEXT);");
      sql.push_back("INSERT INTO " + b + " (id, ref, label) VALUES (1, 1, 'x'), (2, " +
                    std::to_string(rng.range(1, 3)) + ", 'y');");
    }
    if (rng.chance(0.3)) {
      sql.push_back("UPDATE " + a + " SET qty = qty + 1 WHERE id = 1;");
    }
    if (rng.chance(0.2)) {
      sql.push_back("DELETE FROM " + a + " WHERE score < " + std::to_string(rng.range(0, 20)) + ";");
    }
    switch (rng.below(5)) {
      case 0:
        sql.push_back("SELECT id, name FROM " + a + " WHERE qty > " +
                      std::to_string(rng.range(0, 10)) + ";");
        break;
      case 1:
        sql.push_back("SELECT name, score FROM " + a + " ORDER BY score DESC LIMIT 3;");
        break;
      case 2:
        sql.push_back("SELECT COUNT(*) FROM " + a + ";");
        break;
      case 3:
        sql.push_back("SELECT * FROM " + a + " WHERE name IS NOT NULL;");
        break;
      default:
        sql.push_back("SELECT id, qty FROM " + a + " WHERE score >= 10.0 AND qty < 40;");
        break;
    }
    if (two) {
      sql.push_back("SELECT " + a + ".name, " + b + ".label FROM " + a + " JOIN " + b + " ON " +
                    a + ".id = " + b + ".ref;");
    }
    out.push_back(make_case("c" + std::to_string(k), sql, Synthesized{}));
  }
  return out;
}

}  // namespace mist::testing

#endif  // MIST_TESTS_SEED_CORPUS_H_
