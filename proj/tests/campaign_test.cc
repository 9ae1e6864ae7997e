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

#include "mist/campaign.h"

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mist/error.h"

namespace mist {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mist_campaign_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CampaignConfig small_config(const std::string& out) {
  CampaignConfig cfg;
  cfg.catalog = MIST_DATA_DIR "/sqlite_catalog.json";
  cfg.budget = 12;
  cfg.iterations = 20;
  cfg.workers = 2;
  cfg.output = scratch(out).string();
  cfg.coverage.oracle.universe = 400;
  cfg.coverage.oracle.seed = 3;
  return cfg;
}

TEST(Config, DefaultsValidate) {
  CampaignConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.iterations, 600u);
  EXPECT_DOUBLE_EQ(cfg.c, 1.414);
  EXPECT_EQ(cfg.budget, 900u);
}

TEST(Config, JsonRoundTrip) {
  CampaignConfig cfg = small_config("rt");
  cfg.mutation = MutationStrategy::kRandomRule;
  cfg.reward = RewardMode::kAbsoluteRate;
  const auto back = CampaignConfig::from_json(cfg.to_json());
  EXPECT_EQ(back.to_json(), cfg.to_json());
  EXPECT_EQ(back.mutation, MutationStrategy::kRandomRule);
}

TEST(Config, RejectsUnknownKeysAndBadRanges) {
  EXPECT_THROW(CampaignConfig::from_json(nlohmann::json::parse(R"({"budgett": 5})")), ConfigError);
  EXPECT_THROW(CampaignConfig::from_json(nlohmann::json::parse(R"({"mutation": "genetic"})")),
               ConfigError);
  CampaignConfig cfg;
  cfg.min_features = 5;
  cfg.max_features = 4;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.workers = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.c = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Config, RelativePathsFollowTheFile) {
  const fs::path dir = scratch("cfgdir");
  fs::create_directories(dir);
  std::ofstream(dir / "c.json") << R"({"catalog": "cat.json", "budget": 3})";
  const auto cfg = CampaignConfig::load(dir / "c.json");
  EXPECT_EQ(fs::path(cfg.catalog), dir / "cat.json");
  EXPECT_EQ(cfg.budget, 3u);
}

TEST(Report, FormatsRates) {
  EXPECT_EQ(format_rates({0.42, 0.382, 0.245}), "42.0% 38.2% 24.5%");
  EXPECT_EQ(format_percent(1.0), "100.0%");
}

CampaignReport sample_report() {
  CampaignReport r;
  r.dialect = "sqlite";
  r.seed = 42;
  r.synthesis = "hierarchical";
  r.mutation = "none";
  r.stage1.budget = 10;
  r.stage1.attempted = 10;
  r.stage1.synthesized = 9;
  r.stage1.failures = 1;
  r.stage1.outcomes = {{"Pass", 8}, {"SyntaxFail", 1}};
  r.stage1.stop_reason = "budget";
  r.stage1.coverage = {0.42, 0.382, 0.245};
  r.stage1.series = {{0.1, 0.2, 0.05}, {0.42, 0.382, 0.245}};
  r.final_coverage = r.stage1.coverage;
  r.final_branches = {49, 200};
  r.modules = {{"Parser", {1, 2}, {1, 1}, {3, 4}}, {"Other", {0, 0}, {0, 0}, {0, 0}}};
  r.error_digest = {{"syntax", "near \"?\": syntax error", 3}};
  return r;
}

TEST(Report, JsonRoundTripWithoutStageTwo) {
  const auto r = sample_report();
  const auto j = report_to_json(r);
  EXPECT_TRUE(j["stage2"].is_null());
  EXPECT_EQ(report_from_json(j), r);
  const auto text = render_report(r, ReportFormat::kText);
  EXPECT_NE(text.find("stage II: skipped"), std::string::npos);
  EXPECT_NE(text.find("42.0% 38.2% 24.5%"), std::string::npos);
  EXPECT_EQ(text.find("Other"), std::string::npos);
  EXPECT_EQ(nlohmann::json::parse(render_report(r, ReportFormat::kJson)), j);
}

TEST(Report, JsonRoundTripWithStageTwo) {
  auto r = sample_report();
  StageTwoReport s2;
  s2.strategy = "mcts";
  s2.seed_pool = 4;
  s2.evaluations = 20;
  s2.outcomes = {{"Pass", 20}};
  s2.series = {{0.5, 0.5, 0.3}};
  s2.top_cases = {{"m00003", 0.75, 12, "s00001", {"ddl.noop", "dml.noop", "dql.add_cast"}, "Pass"}};
  s2.tree = TreeSummary{20, 31, 4, {}, {{"s00001", 9, 2.5}}};
  s2.stop_reason = "iterations";
  r.stage2 = s2;
  EXPECT_EQ(report_from_json(report_to_json(r)), r);
}

TEST(Campaign, NoMutationSkipsStageTwo) {
  auto cfg = small_config("none");
  cfg.mutation = MutationStrategy::kNone;
  const auto report = run_campaign(cfg);
  EXPECT_FALSE(report.stage2.has_value());
  EXPECT_EQ(report.stage1.attempted, 12u);
  EXPECT_EQ(report.stage1.series.size(), report.stage1.synthesized);
  EXPECT_TRUE(fs::exists(fs::path(cfg.output) / "report.json"));
  EXPECT_NE(slurp(fs::path(cfg.output) / "report.txt").find("stage II: skipped"),
            std::string::npos);
}

TEST(Campaign, MctsRunIsReproducible) {
  auto a = small_config("rep_a");
  auto b = small_config("rep_b");
  const auto ra = run_campaign(a);
  const auto rb = run_campaign(b);
  EXPECT_EQ(ra, rb);
  EXPECT_EQ(slurp(fs::path(a.output) / "report.json"), slurp(fs::path(b.output) / "report.json"));
  ASSERT_TRUE(ra.stage2.has_value());
  EXPECT_EQ(ra.stage2->strategy, "mcts");
  EXPECT_TRUE(fs::exists(fs::path(a.output) / "tree.json"));
  EXPECT_TRUE(fs::exists(fs::path(a.output) / "cases"));
}

TEST(Campaign, SeriesAreMonotone) {
  auto cfg = small_config("mono");
  cfg.mutation = MutationStrategy::kRandomRule;
  const auto r = run_campaign(cfg);
  auto check = [](const std::vector<Rates>& s) {
    for (size_t i = 1; i < s.size(); ++i) {
      EXPECT_GE(s[i].line, s[i - 1].line);
      EXPECT_GE(s[i].function, s[i - 1].function);
      EXPECT_GE(s[i].branch, s[i - 1].branch);
    }
  };
  check(r.stage1.series);
  ASSERT_TRUE(r.stage2.has_value());
  check(r.stage2->series);
  EXPECT_EQ(r.stage2->evaluations, 20u);
}

TEST(Campaign, PlateauEndsStageOne) {
  auto cfg = small_config("plateau");
  cfg.budget = 40;
  cfg.mutation = MutationStrategy::kNone;
  cfg.coverage.oracle.default_fanout = 0;
  cfg.plateau_window = 5;
  cfg.plateau_threshold = 1;
  const auto r = run_campaign(cfg);
  EXPECT_EQ(r.stage1.stop_reason, "plateau");
  ASSERT_TRUE(r.stage1.transition_index.has_value());
  EXPECT_LT(*r.stage1.transition_index, 40u);
}

TEST(Campaign, CatalogDialectMustMatch) {
  auto cfg = small_config("dialect");
  cfg.dialect = "duckdb";
  EXPECT_THROW(run_campaign(cfg), Error);
}

TEST(Campaign, WriteCaseEmitsSqlAndSidecar) {
  const fs::path dir = scratch("write");
  fs::create_directories(dir);
  const auto tc = make_case("s00007", {"SELECT 1;", "SELECT 2;"}, Synthesized{});
  write_case(dir, tc, {{"outcome", "Pass"}});
  EXPECT_EQ(slurp(dir / "s00007.sql"), tc.sql());
  const auto side = nlohmann::json::parse(slurp(dir / "s00007.json"));
  EXPECT_EQ(side["id"], "s00007");
  EXPECT_EQ(side["statements"], 2);
  EXPECT_EQ(side["outcome"], "Pass");
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MIST_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  const std::string cat = std::string("--catalog ") + MIST_DATA_DIR "/sqlite_catalog.json";
  const std::string out = scratch("cli").string();
  EXPECT_EQ(run_cli("campaign run " + cat + " --budget 4 -T 5 --mutation mcts -o " + out), 0);
  EXPECT_TRUE(fs::exists(fs::path(out) / "report.json"));
  EXPECT_EQ(run_cli("campaign run " + cat + " --budget 0 -o " + out), 2);
  EXPECT_EQ(run_cli("campaign run " + cat + " --budget 4 --mutation nope -o " + out), 2);
  EXPECT_EQ(run_cli("campaign run --config /nonexistent/mist.json"), 2);
  EXPECT_EQ(run_cli("campaign run " + cat +
                    " --budget 2 --mutation none --backend mock --mock-script /nonexistent -o " +
                    out),
            2);
  EXPECT_EQ(run_cli("coverage parse " MIST_FIXTURE_DIR "/lcov/three_files.info"), 0);
  EXPECT_EQ(run_cli("--no-such-flag"), 2);
}

TEST(Cli, ExhaustedMockScriptIsABackendFailure) {
  const fs::path dir = scratch("mock");
  fs::create_directories(dir);
  std::ofstream(dir / "script.json") << R"({"responses": ["```sql\nSELECT 1;\n```"], "exhaustion": "error"})";
  const std::string cat = std::string("--catalog ") + MIST_DATA_DIR "/sqlite_catalog.json";
  EXPECT_EQ(run_cli("campaign run " + cat + " --budget 3 --workers 1 --mutation none --backend mock " +
                    "--mock-script " + (dir / "script.json").string() + " -o " +
                    (dir / "out").string()),
            3);
}

}  // namespace
}  // namespace mist
