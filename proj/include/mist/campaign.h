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

#ifndef MIST_CAMPAIGN_H_
#define MIST_CAMPAIGN_H_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mist/coverage.h"
#include "mist/feature_catalog.h"
#include "mist/harness.h"
#include "mist/llm_gateway.h"
#include "mist/mcts.h"
#include "mist/mutation_rules.h"
#include "mist/synthesizer.h"

namespace mist {

enum class BackendKind { kLive, kMock, kTemplate };
enum class MutationStrategy { kNone, kSimpleInstruction, kRandomRule, kMcts };

const char* to_string(BackendKind kind);
const char* to_string(SynthesisStrategy strategy);
const char* to_string(MutationStrategy strategy);
BackendKind backend_kind_from_string(std::string_view text);
SynthesisStrategy synthesis_strategy_from_string(std::string_view text);
MutationStrategy mutation_strategy_from_string(std::string_view text);

struct CoverageSourceConfig {
  // "synthetic": the deterministic oracle scores each case.
  // "lcov": the instrumented target writes a tracefile to `tracefile` for
  // every case; it is read, merged and removed.
  std::string kind = "synthetic";
  std::string tracefile;
  std::string module_map;  // path; empty means the source's default
  SyntheticOracleConfig oracle;
};

struct CampaignConfig {
  std::string dialect = "sqlite";
  std::string catalog = "data/sqlite_catalog.json";
  std::string rules;  // manifest path; empty enables every shipped rule
  BackendKind backend = BackendKind::kTemplate;
  std::string mock_script;  // JSON {"responses": [...], "exhaustion": "cycle"|"error"}
  size_t budget = 900;
  size_t min_features = 3;
  size_t max_features = 20;
  bool diversity = true;
  size_t iterations = 600;
  double c = 1.414;
  RewardMode reward = RewardMode::kIncrementalNormalized;
  size_t et_window = 10;
  uint64_t et_threshold = 50;
  size_t plateau_window = 100;
  uint64_t plateau_threshold = 50;
  size_t workers = 3;
  double timeout_secs = 10;
  std::string output = "mist-out";
  uint64_t seed = 42;
  SynthesisStrategy synthesis = SynthesisStrategy::kHierarchical;
  MutationStrategy mutation = MutationStrategy::kMcts;
  std::string driver = "sqlite";  // "sqlite" or "external"
  ExternalDriverConfig external;
  CoverageSourceConfig coverage;
  size_t seed_pool_cap = 50;
  size_t memory_capacity = 64;
  size_t digest_k = 5;
  size_t max_retries = 3;

  // Unknown keys and out-of-range values raise ConfigError.
  static CampaignConfig from_json(const nlohmann::json& j);
  static CampaignConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  void validate() const;
};

struct StageOneReport {
  size_t budget = 0;
  size_t attempted = 0;
  size_t synthesized = 0;
  size_t failures = 0;  // synthesis failures, no case produced
  std::map<std::string, size_t> outcomes;
  std::string stop_reason;  // "budget" or "plateau"
  std::optional<size_t> transition_index;
  Rates coverage;
  std::vector<Rates> series;

  bool operator==(const StageOneReport&) const = default;
};

struct TopCase {
  std::string id;
  double reward = 0;
  uint64_t new_branches = 0;
  std::string seed;
  std::vector<std::string> rules;
  std::string outcome;

  bool operator==(const TopCase&) const = default;
};

struct StageTwoReport {
  std::string strategy;
  size_t seed_pool = 0;
  size_t evaluations = 0;
  std::map<std::string, size_t> outcomes;
  Rates coverage;
  std::vector<Rates> series;
  std::vector<TopCase> top_cases;
  std::optional<TreeSummary> tree;
  std::string stop_reason;

  bool operator==(const StageTwoReport&) const = default;
};

struct ModuleRow {
  std::string module;
  Counts lines;
  Counts functions;
  Counts branches;

  bool operator==(const ModuleRow&) const = default;
};

struct DigestEntry {
  std::string kind;
  std::string message;
  uint64_t count = 0;

  bool operator==(const DigestEntry&) const = default;
};

struct CampaignReport {
  std::string dialect;
  uint64_t seed = 0;
  std::string synthesis;
  std::string mutation;
  StageOneReport stage1;
  std::optional<StageTwoReport> stage2;
  Rates final_coverage;
  Counts final_branches;
  std::vector<ModuleRow> modules;
  std::vector<DigestEntry> error_digest;

  bool operator==(const CampaignReport&) const = default;
};

nlohmann::json report_to_json(const CampaignReport& r);
CampaignReport report_from_json(const nlohmann::json& j);

enum class ReportFormat { kJson, kText };
std::string render_report(const CampaignReport& r, ReportFormat format);
// "42.0% 38.2% 24.5%"
std::string format_rates(const Rates& r);
std::string format_percent(double rate);

// Where coverage for an executed case comes from.
class CoverageSource {
 public:
  virtual ~CoverageSource() = default;
  virtual CoverageSnapshot collect(const TestCase& tc, const ExecutionReport& report) = 0;
  virtual ModuleMap module_map() const = 0;
  // Whether collect may run concurrently for different cases.
  virtual bool concurrent() const = 0;
};

class SyntheticCoverageSource : public CoverageSource {
 public:
  explicit SyntheticCoverageSource(SyntheticOracleConfig cfg) : oracle_(std::move(cfg)) {}
  CoverageSnapshot collect(const TestCase& tc, const ExecutionReport&) override {
    return oracle_.evaluate(tc);
  }
  ModuleMap module_map() const override { return SyntheticOracle::module_map(); }
  bool concurrent() const override { return true; }

 private:
  SyntheticOracle oracle_;
};

class LcovCoverageSource : public CoverageSource {
 public:
  LcovCoverageSource(std::filesystem::path tracefile, ModuleMap map);
  // Reads and removes the tracefile; a missing file means no coverage.
  CoverageSnapshot collect(const TestCase& tc, const ExecutionReport& report) override;
  ModuleMap module_map() const override { return map_; }
  bool concurrent() const override { return false; }

 private:
  std::filesystem::path tracefile_;
  ModuleMap map_;
};

// Driver plus coverage source behind the CaseEvaluator interface.
class HarnessEvaluator : public CaseEvaluator {
 public:
  HarnessEvaluator(Driver& driver, CoverageSource& source, std::chrono::milliseconds timeout)
      : driver_(driver), source_(source), timeout_(timeout) {}
  Evaluation evaluate(const TestCase& tc) override;

 private:
  Driver& driver_;
  CoverageSource& source_;
  std::chrono::milliseconds timeout_;
};

std::unique_ptr<Backend> make_backend(const CampaignConfig& cfg,
                                      std::shared_ptr<const FeatureCatalog> catalog);
std::unique_ptr<Driver> make_driver(const CampaignConfig& cfg);
std::unique_ptr<CoverageSource> make_coverage_source(const CampaignConfig& cfg);
RuleRegistry make_registry(const CampaignConfig& cfg);

// Both stages end to end; writes the output directory and returns the report.
CampaignReport run_campaign(const CampaignConfig& cfg);

// The random-rule baseline over a seed pool, scored like MCTS.
std::vector<MutationEvaluator::Record> run_random_rule_mutation(
    size_t iterations, const std::vector<TestCase>& seeds, const RuleRegistry& registry,
    const std::string& dialect, CaseEvaluator& evaluator, CoverageSnapshot& cumulative,
    RewardMode mode, double g_norm, Rng& rng);

// Writes `<dir>/<id>.sql` and a `<id>.json` sidecar.
void write_case(const std::filesystem::path& dir, const TestCase& tc, const nlohmann::json& extra);

}  // namespace mist

#endif  // MIST_CAMPAIGN_H_
