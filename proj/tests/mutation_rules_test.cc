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

#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "mist/error.h"
#include "mist/harness.h"
#include "support/seed_corpus.h"

namespace mist {
namespace {

using namespace std::chrono_literals;

size_t count_real(const RuleRegistry& reg, RuleCategory c) {
  size_t n = 0;
  for (const auto* r : reg.rules("sqlite", c)) n += r->is_noop() ? 0 : 1;
  return n;
}

TEST(Registry, ShipsTenTenTwentyFive) {
  const auto reg = RuleRegistry::sqlite();
  EXPECT_EQ(count_real(reg, RuleCategory::kDDL), 10u);
  EXPECT_EQ(count_real(reg, RuleCategory::kDML), 10u);
  EXPECT_EQ(count_real(reg, RuleCategory::kDQL), 25u);
  const std::map<RuleCategory, std::string> prefix = {
      {RuleCategory::kDDL, "ddl."}, {RuleCategory::kDML, "dml."}, {RuleCategory::kDQL, "dql."}};
  for (const auto& [c, p] : prefix) {
    EXPECT_TRUE(reg.get(noop_rule_id(c)).is_noop());
    for (const auto* r : reg.rules("sqlite", c)) EXPECT_EQ(r->id().substr(0, 4), p);
  }
}

TEST(Registry, MenusAreSortedAndIncludeNoop) {
  const auto reg = RuleRegistry::sqlite();
  const auto menu = rule_menu(reg, "sqlite", RuleCategory::kDQL);
  EXPECT_EQ(menu.size(), 26u);
  EXPECT_TRUE(std::is_sorted(menu.begin(), menu.end()));
  EXPECT_NE(std::find(menu.begin(), menu.end(), "dql.noop"), menu.end());
  EXPECT_THROW(rule_menu(reg, "duckdb", RuleCategory::kDQL), UnknownDialect);
}

TEST(Registry, ManifestRestrictsRules) {
  const auto reg = RuleRegistry::from_manifest(nlohmann::json::parse(
      R"({"dialect": "sqlite", "enabled": ["ddl.add_check", "dql.add_cast"]})"));
  EXPECT_EQ(rule_menu(reg, "sqlite", RuleCategory::kDDL),
            (std::vector<std::string>{"ddl.add_check", "ddl.noop"}));
  EXPECT_EQ(rule_menu(reg, "sqlite", RuleCategory::kDML), std::vector<std::string>{"dml.noop"});
  EXPECT_THROW(reg.get("dml.bulk_insert"), UnknownRule);
  EXPECT_THROW(RuleRegistry::from_manifest(
                   nlohmann::json::parse(R"({"dialect": "sqlite", "enabled": ["dql.nope"]})")),
               UnknownRule);
  EXPECT_THROW(RuleRegistry::from_manifest(
                   nlohmann::json::parse(R"({"dialect": "mysql", "enabled": []})")),
               UnknownDialect);
  EXPECT_THROW(RuleRegistry::from_manifest(nlohmann::json::parse(R"({"enabled": []})")),
               ConfigError);
}

TEST(Registry, ShippedManifestEnablesEverything) {
  const auto reg = RuleRegistry::load_manifest(MIST_DATA_DIR "/sqlite_rules.json");
  EXPECT_EQ(reg.manifest("sqlite"), RuleRegistry::sqlite().manifest("sqlite"));
  EXPECT_EQ(reg.manifest("sqlite")["enabled"].size(), 45u);
}

TEST(Rules, NoopKeepsStatementsAndRecordsProvenance) {
  const auto reg = RuleRegistry::sqlite();
  const auto seed = make_case("s1", {"CREATE TABLE t(x);", "SELECT x FROM t;"}, Synthesized{});
  Rng rng(1);
  const auto out = reg.get("dml.noop").apply(seed, rng);
  EXPECT_EQ(out.mutated.statement_texts(), seed.statement_texts());
  EXPECT_TRUE(out.changed_statements.empty());
  const auto& prov = std::get<Mutated>(out.mutated.provenance);
  EXPECT_EQ(prov.parent_id, "s1");
  EXPECT_EQ(prov.rules, std::vector<std::string>{"dml.noop"});
}

TEST(Rules, ChainedApplicationsAppendToProvenance) {
  const auto reg = RuleRegistry::sqlite();
  const auto seed = make_case(
      "s9", {"CREATE TABLE t(a INTEGER, b TEXT);", "INSERT INTO t VALUES (1, 'x');", "SELECT a FROM t;"},
      Synthesized{});
  Rng rng(3);
  auto step = reg.get("ddl.add_check").apply(seed, rng);
  step = reg.get("dql.add_distinct").apply(step.mutated, rng);
  const auto& prov = std::get<Mutated>(step.mutated.provenance);
  EXPECT_EQ(prov.parent_id, "s9");
  EXPECT_EQ(prov.rules, (std::vector<std::string>{"ddl.add_check", "dql.add_distinct"}));
}

TEST(Rules, NotApplicableWithoutTarget) {
  const auto reg = RuleRegistry::sqlite();
  const auto only_select = make_case("q", {"SELECT 1;"}, Synthesized{});
  EXPECT_FALSE(reg.get("ddl.add_check").applicable(only_select));
  EXPECT_FALSE(reg.get("dml.bulk_insert").applicable(only_select));
  Rng rng(1);
  EXPECT_THROW(reg.get("ddl.add_check").apply(only_select, rng), NotApplicable);
}

TEST(Rules, OrderByExtendsExistingClause) {
  const auto reg = RuleRegistry::sqlite();
  const auto seed =
      make_case("o", {"CREATE TABLE t(a INTEGER);", "SELECT a FROM t ORDER BY a;"}, Synthesized{});
  for (uint64_t s = 0; s < 20; ++s) {
    Rng rng(s);
    const auto text = reg.get("dql.add_order_by").apply(seed, rng).mutated.statement_texts().back();
    EXPECT_EQ(text.find(" ,"), std::string::npos) << text;
    EXPECT_NE(text.find("ORDER BY a, "), std::string::npos) << text;
  }
}

TEST(Rules, StatementDeltaMatchesApplication) {
  const auto reg = RuleRegistry::sqlite();
  const auto corpus = testing::seed_corpus(40);
  for (auto c : {RuleCategory::kDDL, RuleCategory::kDML, RuleCategory::kDQL}) {
    for (const auto* rule : reg.rules("sqlite", c)) {
      for (const auto& tc : corpus) {
        if (!rule->applicable(tc)) continue;
        Rng rng(11);
        const auto out = rule->apply(tc, rng);
        EXPECT_EQ(static_cast<int>(out.mutated.statements.size()) -
                      static_cast<int>(tc.statements.size()),
                  rule->statement_delta())
            << rule->id();
        for (size_t i : out.changed_statements) EXPECT_LT(i, out.mutated.statements.size());
        break;
      }
    }
  }
}

TEST(Rules, DeterministicForAFixedRngSeed) {
  const auto reg = RuleRegistry::sqlite();
  const auto corpus = testing::seed_corpus(10);
  for (const auto* rule : reg.rules("sqlite", RuleCategory::kDQL)) {
    for (const auto& tc : corpus) {
      if (!rule->applicable(tc)) continue;
      Rng a(5), b(5);
      EXPECT_EQ(rule->apply(tc, a).mutated.sql(), rule->apply(tc, b).mutated.sql()) << rule->id();
    }
  }
}

TEST(Rules, EveryRuleHasAPassingExample) {
  const auto reg = RuleRegistry::sqlite();
  const auto corpus = testing::seed_corpus(100);
  SqliteDriver driver;
  for (const auto& tc : corpus) {
    ASSERT_EQ(classify_outcome(driver.execute_case(tc, 10s)), OutcomeClass::kPass) << tc.sql();
  }
  for (auto c : {RuleCategory::kDDL, RuleCategory::kDML, RuleCategory::kDQL}) {
    for (const auto* rule : reg.rules("sqlite", c)) {
      if (rule->is_noop()) continue;
      bool passed = false;
      for (size_t i = 0; i < corpus.size() && !passed; ++i) {
        if (!rule->applicable(corpus[i])) continue;
        for (uint64_t s = 0; s < 4 && !passed; ++s) {
          Rng rng(s);
          const auto out = rule->apply(corpus[i], rng);
          passed = classify_outcome(driver.execute_case(out.mutated, 10s)) == OutcomeClass::kPass;
        }
      }
      EXPECT_TRUE(passed) << rule->id();
    }
  }
}

}  // namespace
}  // namespace mist
