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

#include "mist/coverage.h"

#include <gtest/gtest.h>

#include "mist/error.h"
#include "mist/json_util.h"

namespace mist {
namespace {

const std::string kFixture = std::string(MIST_FIXTURE_DIR) + "/lcov/three_files.info";

TEST(Lcov, FixtureRatesMatchHandCount) {
  const auto snap = parse_lcov(kFixture);
  ASSERT_EQ(snap.files.size(), 3u);
  // parser.c 3/6 lines, executor.c 8/10, storage.c 1/3 after aggregation.
  EXPECT_EQ(snap.lines(), (Counts{12, 19}));
  EXPECT_EQ(snap.functions(), (Counts{4, 6}));
  EXPECT_EQ(snap.branches(), (Counts{6, 12}));
  const Rates r = snap.rates();
  EXPECT_EQ(r.line, 12.0 / 19.0);
  EXPECT_EQ(r.function, 4.0 / 6.0);
  EXPECT_EQ(r.branch, 0.5);
}

TEST(Lcov, RecordsForTheSameFileAggregate) {
  const auto snap = parse_lcov(kFixture);
  const auto& storage = snap.files.at("/build/src/storage.c");
  EXPECT_EQ(storage.lines, (std::map<int, bool>{{1, true}, {2, false}, {3, false}}));
  EXPECT_TRUE(storage.functions.at("pager_open").covered);
  EXPECT_TRUE(storage.branches.at(BranchId{2, "0", "0"}));
  EXPECT_FALSE(storage.branches.at(BranchId{2, "0", "1"}));
}

TEST(Lcov, DashMeansBranchNotTaken) {
  const auto snap = parse_lcov_text("SF:a.c\nBRDA:3,0,0,-\nBRDA:3,0,1,2\nend_of_record\n");
  EXPECT_EQ(snap.branches(), (Counts{1, 2}));
}

TEST(Lcov, MinimalRecord) {
  const auto snap = parse_lcov_text("SF:a.c\nDA:1,1\nend_of_record\n");
  EXPECT_EQ(snap.lines(), (Counts{1, 1}));
  EXPECT_EQ(snap.functions(), (Counts{0, 0}));
}

TEST(Lcov, MalformedLineNamesItsPosition) {
  try {
    parse_lcov_text("SF:a.c\nDA:1,1\nDA:oops\nend_of_record\n", "t.info");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("t.info:3"), std::string::npos) << e.what();
  }
}

TEST(Lcov, MissingEndOfRecordIsAnError) {
  EXPECT_THROW(parse_lcov_text("SF:a.c\nDA:1,1\n"), ParseError);
}

TEST(Lcov, RenderParseRoundTripIsByteStable) {
  const auto snap = parse_lcov(kFixture);
  const std::string once = render_lcov(snap);
  const auto again = parse_lcov_text(once);
  EXPECT_EQ(again, snap);
  EXPECT_EQ(render_lcov(again), once);
}

TEST(Merge, UnionAndMismatch) {
  const auto a = parse_lcov_text("SF:a.c\nDA:1,1\nDA:2,0\nBRDA:2,0,0,0\nend_of_record\n");
  const auto b = parse_lcov_text("SF:a.c\nDA:1,0\nDA:2,1\nBRDA:2,0,0,4\nend_of_record\n");
  const auto m = merge(a, b);
  EXPECT_EQ(m.lines(), (Counts{2, 2}));
  EXPECT_EQ(diff_new_branches(a, b), 1u);
  EXPECT_EQ(diff_new_branches(m, b), 0u);
  const auto c = parse_lcov_text("SF:a.c\nDA:1,0\nDA:7,1\nend_of_record\n");
  EXPECT_THROW(merge(a, c), UniverseMismatch);
}

TEST(Merge, DisjointFilesAndEmpty) {
  const auto a = parse_lcov_text("SF:a.c\nDA:1,1\nend_of_record\n");
  const auto b = parse_lcov_text("SF:b.c\nDA:1,0\nend_of_record\n");
  EXPECT_EQ(merge(a, b).files.size(), 2u);
  EXPECT_EQ(merge(CoverageSnapshot{}, a), a);
  EXPECT_EQ(diff_new_branches(CoverageSnapshot{}, CoverageSnapshot{}), 0u);
}

TEST(Glob, SegmentsAndDoubleStar) {
  EXPECT_TRUE(glob_match("src/*.c", "src/parse.c"));
  EXPECT_FALSE(glob_match("src/*.c", "src/sub/parse.c"));
  EXPECT_TRUE(glob_match("src/**/*.c", "src/sub/deep/parse.c"));
  EXPECT_TRUE(glob_match("src/**/*.c", "src/parse.c"));
  EXPECT_TRUE(glob_match("**/parser.c", "/build/src/parser.c"));
  EXPECT_TRUE(glob_match("sqlite3Parser*", "sqlite3ParserAlloc"));
  EXPECT_FALSE(glob_match("sqlite3Parser*", "yyParser"));
}

TEST(Modules, FixtureAttribution) {
  const auto snap = parse_lcov(kFixture);
  const auto map = ModuleMap::load(std::string(MIST_FIXTURE_DIR) + "/lcov/module_map.json");
  const auto rows = module_rates(snap, map);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].module, "Parser");
  EXPECT_EQ(rows[0].lines, (Counts{3, 6}));
  EXPECT_EQ(rows[0].branches, (Counts{1, 4}));
  EXPECT_EQ(rows[1].module, "Optimizer");
  EXPECT_EQ(rows[1].lines, (Counts{0, 0}));
  EXPECT_EQ(rows[2].module, "Executor");
  EXPECT_EQ(rows[2].lines, (Counts{8, 9}));
  EXPECT_EQ(rows[2].functions, (Counts{2, 2}));
  EXPECT_EQ(rows[2].branches, (Counts{4, 6}));
  EXPECT_EQ(rows[3].lines, (Counts{1, 3}));
  EXPECT_EQ(rows[4].module, "Other");
  EXPECT_EQ(rows[4].lines, (Counts{0, 1}));
  EXPECT_EQ(rows[4].functions, (Counts{0, 1}));
}

TEST(Modules, UnknownModuleRejected) {
  EXPECT_THROW(ModuleMap::from_json(nlohmann::json::parse(R"([{"module":"Planner","globs":[]}])")),
               ConfigError);
}

TEST(Modules, ShippedMapsLoad) {
  EXPECT_NO_THROW(ModuleMap::load(std::string(MIST_DATA_DIR) + "/sqlite_module_map.json"));
  EXPECT_NO_THROW(ModuleMap::load(std::string(MIST_DATA_DIR) + "/directory_module_map.json"));
}

TEST(Plateau, FiresOnlyOnAFullQuietWindow) {
  PlateauDetector d(3, 5);
  EXPECT_FALSE(d.push(0));
  EXPECT_FALSE(d.push(0));
  EXPECT_TRUE(d.push(4));  // 0+0+4 < 5
  PlateauDetector e(3, 5);
  EXPECT_FALSE(e.push(10));
  EXPECT_FALSE(e.push(0));
  EXPECT_FALSE(e.push(0));  // 10 still in window
  EXPECT_TRUE(e.push(0));
}

TEST(Plateau, ZeroWindowRejected) { EXPECT_THROW(PlateauDetector(0, 5), ConfigError); }

TEST(SyntheticOracle, MappingCombosAndDeterminism) {
  SyntheticOracleConfig cfg;
  cfg.universe = 100;
  cfg.default_fanout = 0;
  cfg.mapping["SELECT"] = {1, 2};
  cfg.combos.push_back({{"SELECT", "fn:ABS"}, {50, 51, 52}});
  const SyntheticOracle oracle(cfg);
  const auto plain = make_case("a", {"SELECT 1;"}, Synthesized{});
  const auto combo = make_case("b", {"SELECT abs(-1);"}, Synthesized{});
  EXPECT_EQ(oracle.evaluate(plain).branches(), (Counts{2, 100}));
  EXPECT_EQ(oracle.evaluate(combo).branches(), (Counts{5, 100}));
  EXPECT_EQ(oracle.evaluate(combo), oracle.evaluate(combo));
  EXPECT_EQ(oracle.evaluate(TestCase{}).branches(), (Counts{0, 100}));
}

TEST(SyntheticOracle, FeaturesIncludeProvenance) {
  auto tc = make_case("m1", {"SELECT a FROM t WHERE a > 1;"}, Mutated{"s7", {"dql.add_limit_offset"}});
  const auto f = case_features(tc);
  EXPECT_TRUE(f.count("seed:s7"));
  EXPECT_TRUE(f.count("rule:dql.add_limit_offset"));
  EXPECT_TRUE(f.count("op:>"));
  EXPECT_TRUE(f.count("kind:DQL"));
}

TEST(SyntheticOracle, OutOfUniverseRejected) {
  SyntheticOracleConfig cfg;
  cfg.universe = 10;
  cfg.mapping["SELECT"] = {10};
  EXPECT_THROW(SyntheticOracle{cfg}, ConfigError);
}

}  // namespace
}  // namespace mist
