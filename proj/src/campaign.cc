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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <sstream>
#include <thread>

#include "mist/error.h"
#include "mist/json_util.h"

#ifndef MIST_DATA_DIR
#define MIST_DATA_DIR "data"
#endif

namespace mist {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::kLive:
      return "live";
    case BackendKind::kMock:
      return "mock";
    case BackendKind::kTemplate:
      return "template";
  }
  return "?";
}

const char* to_string(SynthesisStrategy strategy) {
  switch (strategy) {
    case SynthesisStrategy::kSimple:
      return "simple";
    case SynthesisStrategy::kRandomFeature:
      return "random-feature";
    case SynthesisStrategy::kHierarchical:
      return "hierarchical";
  }
  return "?";
}

const char* to_string(MutationStrategy strategy) {
  switch (strategy) {
    case MutationStrategy::kNone:
      return "none";
    case MutationStrategy::kSimpleInstruction:
      return "simple-instruction";
    case MutationStrategy::kRandomRule:
      return "random-rule";
    case MutationStrategy::kMcts:
      return "mcts";
  }
  return "?";
}

BackendKind backend_kind_from_string(std::string_view text) {
  for (auto k : {BackendKind::kLive, BackendKind::kMock, BackendKind::kTemplate}) {
    if (text == to_string(k)) return k;
  }
  throw ConfigError("backend must be live, mock or template, got '" + std::string(text) + "'");
}

SynthesisStrategy synthesis_strategy_from_string(std::string_view text) {
  for (auto s : {SynthesisStrategy::kSimple, SynthesisStrategy::kRandomFeature,
                 SynthesisStrategy::kHierarchical}) {
    if (text == to_string(s)) return s;
  }
  throw ConfigError("synthesis must be simple, random-feature or hierarchical, got '" +
                    std::string(text) + "'");
}

MutationStrategy mutation_strategy_from_string(std::string_view text) {
  for (auto s : {MutationStrategy::kNone, MutationStrategy::kSimpleInstruction,
                 MutationStrategy::kRandomRule, MutationStrategy::kMcts}) {
    if (text == to_string(s)) return s;
  }
  throw ConfigError("mutation must be none, simple-instruction, random-rule or mcts, got '" +
                    std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Config.

namespace {

template <typename T>
T field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

}  // namespace

CampaignConfig CampaignConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("campaign config must be a JSON object");
  CampaignConfig c;
  for (const auto& [key, value] : j.items()) {
    const char* k = key.c_str();
    if (key == "dialect") c.dialect = field<std::string>(j, k);
    else if (key == "catalog") c.catalog = field<std::string>(j, k);
    else if (key == "rules") c.rules = field<std::string>(j, k);
    else if (key == "backend") c.backend = backend_kind_from_string(field<std::string>(j, k));
    else if (key == "mock_script") c.mock_script = field<std::string>(j, k);
    else if (key == "budget") c.budget = field<size_t>(j, k);
    else if (key == "min_features") c.min_features = field<size_t>(j, k);
    else if (key == "max_features") c.max_features = field<size_t>(j, k);
    else if (key == "diversity") c.diversity = field<bool>(j, k);
    else if (key == "iterations") c.iterations = field<size_t>(j, k);
    else if (key == "c") c.c = field<double>(j, k);
    else if (key == "reward") c.reward = reward_mode_from_string(field<std::string>(j, k));
    else if (key == "et_window") c.et_window = field<size_t>(j, k);
    else if (key == "et_threshold") c.et_threshold = field<uint64_t>(j, k);
    else if (key == "plateau_window") c.plateau_window = field<size_t>(j, k);
    else if (key == "plateau_threshold") c.plateau_threshold = field<uint64_t>(j, k);
    else if (key == "workers") c.workers = field<size_t>(j, k);
    else if (key == "timeout_secs") c.timeout_secs = field<double>(j, k);
    else if (key == "output") c.output = field<std::string>(j, k);
    else if (key == "seed") c.seed = field<uint64_t>(j, k);
    else if (key == "synthesis") c.synthesis = synthesis_strategy_from_string(field<std::string>(j, k));
    else if (key == "mutation") c.mutation = mutation_strategy_from_string(field<std::string>(j, k));
    else if (key == "driver") c.driver = field<std::string>(j, k);
    else if (key == "external") c.external = ExternalDriverConfig::from_json(value);
    else if (key == "seed_pool_cap") c.seed_pool_cap = field<size_t>(j, k);
    else if (key == "memory_capacity") c.memory_capacity = field<size_t>(j, k);
    else if (key == "digest_k") c.digest_k = field<size_t>(j, k);
    else if (key == "max_retries") c.max_retries = field<size_t>(j, k);
    else if (key == "coverage") {
      if (!value.is_object()) throw ConfigError("config field 'coverage' must be an object");
      for (const auto& [ck, cv] : value.items()) {
        if (ck == "source") c.coverage.kind = field<std::string>(value, "source");
        else if (ck == "tracefile") c.coverage.tracefile = field<std::string>(value, "tracefile");
        else if (ck == "module_map") c.coverage.module_map = field<std::string>(value, "module_map");
        else if (ck == "oracle") c.coverage.oracle = SyntheticOracleConfig::from_json(cv);
        else throw ConfigError("unknown coverage field '" + ck + "'");
      }
    } else {
      throw ConfigError("unknown config field '" + key + "'");
    }
  }
  return c;
}

CampaignConfig CampaignConfig::load(const fs::path& path) {
  json j;
  try {
    j = read_json_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  CampaignConfig c = from_json(j);
  // Relative paths inside a config file are relative to that file.
  const fs::path base = path.parent_path();
  auto rebase = [&](std::string& p, const char* key, const json& obj) {
    if (obj.contains(key) && !p.empty() && fs::path(p).is_relative()) p = (base / p).string();
  };
  rebase(c.catalog, "catalog", j);
  rebase(c.rules, "rules", j);
  rebase(c.mock_script, "mock_script", j);
  rebase(c.output, "output", j);
  if (j.contains("coverage")) {
    rebase(c.coverage.tracefile, "tracefile", j["coverage"]);
    rebase(c.coverage.module_map, "module_map", j["coverage"]);
  }
  return c;
}

json CampaignConfig::to_json() const {
  json oracle = {{"universe", coverage.oracle.universe},
                 {"seed", coverage.oracle.seed},
                 {"default_fanout", coverage.oracle.default_fanout},
                 {"mapping", coverage.oracle.mapping}};
  json combos = json::array();
  for (const auto& cb : coverage.oracle.combos) {
    combos.push_back({{"features", cb.features}, {"branches", cb.branches}});
  }
  oracle["combos"] = combos;
  json j = {{"dialect", dialect},
            {"catalog", catalog},
            {"rules", rules},
            {"backend", mist::to_string(backend)},
            {"mock_script", mock_script},
            {"budget", budget},
            {"min_features", min_features},
            {"max_features", max_features},
            {"diversity", diversity},
            {"iterations", iterations},
            {"c", c},
            {"reward", mist::to_string(reward)},
            {"et_window", et_window},
            {"et_threshold", et_threshold},
            {"plateau_window", plateau_window},
            {"plateau_threshold", plateau_threshold},
            {"workers", workers},
            {"timeout_secs", timeout_secs},
            {"output", output},
            {"seed", seed},
            {"synthesis", mist::to_string(synthesis)},
            {"mutation", mist::to_string(mutation)},
            {"driver", driver},
            {"coverage",
             {{"source", coverage.kind},
              {"tracefile", coverage.tracefile},
              {"module_map", coverage.module_map},
              {"oracle", oracle}}},
            {"seed_pool_cap", seed_pool_cap},
            {"memory_capacity", memory_capacity},
            {"digest_k", digest_k},
            {"max_retries", max_retries}};
  if (!external.command.empty()) {
    j["external"] = {{"command", external.command},
                     {"sql_via", external.sql_via},
                     {"crash_exit_codes", external.crash_exit_codes},
                     {"syntax_patterns", external.syntax_patterns},
                     {"error_patterns", external.error_patterns}};
  }
  return j;
}

void CampaignConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(!dialect.empty(), "dialect must be set");
  require(budget >= 1, "budget must be at least 1");
  require(min_features >= 1, "min_features must be at least 1");
  require(max_features >= min_features, "max_features must be >= min_features");
  require(std::isfinite(c) && c >= 0, "c must be a non-negative number");
  require(et_window >= 1, "et_window must be at least 1");
  require(plateau_window >= 1, "plateau_window must be at least 1");
  require(workers >= 1 && workers <= 64, "workers must be in [1, 64]");
  require(timeout_secs >= 0 && std::isfinite(timeout_secs), "timeout_secs must be >= 0");
  require(seed_pool_cap >= 1, "seed_pool_cap must be at least 1");
  require(memory_capacity >= 1, "memory_capacity must be at least 1");
  require(!output.empty(), "output directory must be set");
  require(backend != BackendKind::kMock || !mock_script.empty(), "mock backend needs mock_script");
  require(driver == "sqlite" || driver == "external", "driver must be sqlite or external");
  require(driver != "external" || !external.command.empty(), "external driver needs a command");
  require(coverage.kind == "synthetic" || coverage.kind == "lcov",
          "coverage source must be synthetic or lcov");
  require(coverage.kind != "lcov" || !coverage.tracefile.empty(), "lcov coverage needs tracefile");
}

// ---------------------------------------------------------------------------
// Report.

std::string format_percent(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", rate * 100.0);
  return buf;
}

std::string format_rates(const Rates& r) {
  return format_percent(r.line) + " " + format_percent(r.function) + " " +
         format_percent(r.branch);
}

namespace {

json rates_json(const Rates& r) {
  return {{"line", r.line}, {"function", r.function}, {"branch", r.branch}};
}

Rates rates_from(const json& j) {
  return {j.at("line").get<double>(), j.at("function").get<double>(),
          j.at("branch").get<double>()};
}

json counts_json(const Counts& c) {
  return {{"covered", c.covered}, {"instrumented", c.instrumented}};
}

Counts counts_from(const json& j) {
  return {j.at("covered").get<uint64_t>(), j.at("instrumented").get<uint64_t>()};
}

json series_json(const std::vector<Rates>& s) {
  json out = json::array();
  for (const auto& r : s) out.push_back(json::array({r.line, r.function, r.branch}));
  return out;
}

std::vector<Rates> series_from(const json& j) {
  std::vector<Rates> out;
  for (const auto& e : j) out.push_back({e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<double>()});
  return out;
}

}  // namespace

json report_to_json(const CampaignReport& r) {
  json s1 = {{"budget", r.stage1.budget},
             {"attempted", r.stage1.attempted},
             {"synthesized", r.stage1.synthesized},
             {"failures", r.stage1.failures},
             {"outcomes", r.stage1.outcomes},
             {"stop_reason", r.stage1.stop_reason},
             {"transition_index", r.stage1.transition_index ? json(*r.stage1.transition_index) : json()},
             {"coverage", rates_json(r.stage1.coverage)},
             {"series", series_json(r.stage1.series)}};
  json s2;
  if (r.stage2) {
    const auto& t = *r.stage2;
    json top = json::array();
    for (const auto& c : t.top_cases) {
      top.push_back({{"id", c.id},
                     {"reward", c.reward},
                     {"new_branches", c.new_branches},
                     {"seed", c.seed},
                     {"rules", c.rules},
                     {"outcome", c.outcome}});
    }
    s2 = {{"strategy", t.strategy},
          {"seed_pool", t.seed_pool},
          {"evaluations", t.evaluations},
          {"outcomes", t.outcomes},
          {"coverage", rates_json(t.coverage)},
          {"series", series_json(t.series)},
          {"top_cases", top},
          {"tree", t.tree ? tree_summary_to_json(*t.tree) : json()},
          {"stop_reason", t.stop_reason}};
  }
  json modules = json::array();
  for (const auto& m : r.modules) {
    modules.push_back({{"module", m.module},
                       {"lines", counts_json(m.lines)},
                       {"functions", counts_json(m.functions)},
                       {"branches", counts_json(m.branches)}});
  }
  json digest = json::array();
  for (const auto& d : r.error_digest) {
    digest.push_back({{"kind", d.kind}, {"message", d.message}, {"count", d.count}});
  }
  return {{"dialect", r.dialect},
          {"seed", r.seed},
          {"synthesis", r.synthesis},
          {"mutation", r.mutation},
          {"stage1", s1},
          {"stage2", s2},
          {"final_coverage", rates_json(r.final_coverage)},
          {"final_branches", counts_json(r.final_branches)},
          {"modules", modules},
          {"error_digest", digest}};
}

CampaignReport report_from_json(const json& j) {
  CampaignReport r;
  try {
    r.dialect = j.at("dialect").get<std::string>();
    r.seed = j.at("seed").get<uint64_t>();
    r.synthesis = j.at("synthesis").get<std::string>();
    r.mutation = j.at("mutation").get<std::string>();
    const auto& s1 = j.at("stage1");
    r.stage1.budget = s1.at("budget").get<size_t>();
    r.stage1.attempted = s1.at("attempted").get<size_t>();
    r.stage1.synthesized = s1.at("synthesized").get<size_t>();
    r.stage1.failures = s1.at("failures").get<size_t>();
    r.stage1.outcomes = s1.at("outcomes").get<std::map<std::string, size_t>>();
    r.stage1.stop_reason = s1.at("stop_reason").get<std::string>();
    if (!s1.at("transition_index").is_null()) {
      r.stage1.transition_index = s1.at("transition_index").get<size_t>();
    }
    r.stage1.coverage = rates_from(s1.at("coverage"));
    r.stage1.series = series_from(s1.at("series"));
    const auto& s2 = j.at("stage2");
    if (!s2.is_null()) {
      StageTwoReport t;
      t.strategy = s2.at("strategy").get<std::string>();
      t.seed_pool = s2.at("seed_pool").get<size_t>();
      t.evaluations = s2.at("evaluations").get<size_t>();
      t.outcomes = s2.at("outcomes").get<std::map<std::string, size_t>>();
      t.coverage = rates_from(s2.at("coverage"));
      t.series = series_from(s2.at("series"));
      for (const auto& c : s2.at("top_cases")) {
        t.top_cases.push_back({c.at("id").get<std::string>(), c.at("reward").get<double>(),
                               c.at("new_branches").get<uint64_t>(), c.at("seed").get<std::string>(),
                               c.at("rules").get<std::vector<std::string>>(),
                               c.at("outcome").get<std::string>()});
      }
      if (!s2.at("tree").is_null()) t.tree = tree_summary_from_json(s2.at("tree"));
      t.stop_reason = s2.at("stop_reason").get<std::string>();
      r.stage2 = std::move(t);
    }
    r.final_coverage = rates_from(j.at("final_coverage"));
    r.final_branches = counts_from(j.at("final_branches"));
    for (const auto& m : j.at("modules")) {
      r.modules.push_back({m.at("module").get<std::string>(), counts_from(m.at("lines")),
                           counts_from(m.at("functions")), counts_from(m.at("branches"))});
    }
    for (const auto& d : j.at("error_digest")) {
      r.error_digest.push_back({d.at("kind").get<std::string>(), d.at("message").get<std::string>(),
                                d.at("count").get<uint64_t>()});
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("campaign report: ") + e.what());
  }
  return r;
}

std::string render_report(const CampaignReport& r, ReportFormat format) {
  if (format == ReportFormat::kJson) return report_to_json(r).dump(2) + "\n";
  std::ostringstream out;
  out << "MIST campaign report\n";
  out << "dialect: " << r.dialect << "  seed: " << r.seed << "  synthesis: " << r.synthesis
      << "  mutation: " << r.mutation << "\n\n";
  out << "coverage (line function branch)\n";
  out << "  stage I:  " << format_rates(r.stage1.coverage) << "\n";
  if (r.stage2) {
    out << "  stage II: " << format_rates(r.stage2->coverage) << "\n";
  } else {
    out << "  stage II: skipped\n";
  }
  out << "  final:    " << format_rates(r.final_coverage) << "\n\n";

  out << "stage I: " << r.stage1.attempted << " attempted, " << r.stage1.synthesized
      << " synthesized, " << r.stage1.failures << " synthesis failures, stopped by "
      << r.stage1.stop_reason;
  if (r.stage1.transition_index) out << " after case " << *r.stage1.transition_index;
  out << "\n";
  for (const auto& [k, v] : r.stage1.outcomes) out << "  " << k << ": " << v << "\n";
  if (r.stage2) {
    const auto& t = *r.stage2;
    out << "stage II (" << t.strategy << "): " << t.evaluations << " evaluations over "
        << t.seed_pool << " seeds, stopped by " << t.stop_reason << "\n";
    for (const auto& [k, v] : t.outcomes) out << "  " << k << ": " << v << "\n";
    if (!t.top_cases.empty()) {
      out << "  top cases:\n";
      for (const auto& c : t.top_cases) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.4f", c.reward);
        out << "    " << c.id << "  reward " << buf << "  +" << c.new_branches << " branches  seed "
            << c.seed << " [";
        for (size_t k = 0; k < c.rules.size(); ++k) out << (k ? ", " : "") << c.rules[k];
        out << "] " << c.outcome << "\n";
      }
    }
    if (t.tree) {
      out << "  tree: " << t.tree->nodes << " nodes, root N=" << t.tree->root_visits
          << ", depth " << t.tree->max_depth << ", " << t.tree->pruned_seeds.size()
          << " pruned seeds\n";
    }
  } else {
    out << "stage II: skipped\n";
  }

  if (!r.modules.empty()) {
    out << "\nmodules (Parser Optimizer Executor Storage)\n";
    auto row = [&](const char* label, Counts ModuleRow::*dim) {
      out << "  " << label;
      for (size_t k = 0; k < r.modules.size() && k < 4; ++k) {
        out << (k ? " " : "") << format_percent((r.modules[k].*dim).rate());
      }
      out << "\n";
    };
    row("line:     ", &ModuleRow::lines);
    row("function: ", &ModuleRow::functions);
    row("branch:   ", &ModuleRow::branches);
    if (r.modules.size() > 4 && r.modules[4].lines.instrumented + r.modules[4].branches.instrumented > 0) {
      const auto& other = r.modules[4];
      out << "  other:    " << format_percent(other.lines.rate()) << " "
          << format_percent(other.functions.rate()) << " " << format_percent(other.branches.rate())
          << "\n";
    }
  }
  if (!r.error_digest.empty()) {
    out << "\nerror digest\n";
    for (const auto& d : r.error_digest) {
      out << "  [" << d.kind << " x" << d.count << "] " << d.message << "\n";
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Components.

LcovCoverageSource::LcovCoverageSource(fs::path tracefile, ModuleMap map)
    : tracefile_(std::move(tracefile)), map_(std::move(map)) {}

CoverageSnapshot LcovCoverageSource::collect(const TestCase&, const ExecutionReport&) {
  std::error_code ec;
  if (!fs::exists(tracefile_, ec)) return {};
  CoverageSnapshot snap = parse_lcov(tracefile_);
  fs::remove(tracefile_, ec);
  return snap;
}

Evaluation HarnessEvaluator::evaluate(const TestCase& tc) {
  Evaluation ev;
  ev.report = driver_.execute_case(tc, timeout_);
  ev.outcome = classify_outcome(ev.report);
  ev.coverage = source_.collect(tc, ev.report);
  return ev;
}

std::unique_ptr<Backend> make_backend(const CampaignConfig& cfg,
                                      std::shared_ptr<const FeatureCatalog> catalog) {
  switch (cfg.backend) {
    case BackendKind::kTemplate:
      return std::make_unique<TemplateBackend>(std::move(catalog));
    case BackendKind::kMock: {
      json j;
      try {
        j = read_json_file(cfg.mock_script);
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
      MockScript script;
      if (j.is_array()) {
        script.responses = j.get<std::vector<std::string>>();
      } else {
        script.responses = field<std::vector<std::string>>(j, "responses");
        if (j.value("exhaustion", std::string("cycle")) == "error") {
          script.policy = ExhaustionPolicy::kError;
        }
      }
      if (script.responses.empty()) throw ConfigError("mock script has no responses");
      return std::make_unique<MockBackend>(std::move(script));
    }
    case BackendKind::kLive:
      return std::make_unique<HttpBackend>(HttpBackendConfig::from_env());
  }
  throw ConfigError("unknown backend");
}

std::unique_ptr<Driver> make_driver(const CampaignConfig& cfg) {
  if (cfg.driver == "external") return std::make_unique<ExternalProcessDriver>(cfg.external);
  return std::make_unique<SqliteDriver>();
}

std::unique_ptr<CoverageSource> make_coverage_source(const CampaignConfig& cfg) {
  if (cfg.coverage.kind == "lcov") {
    ModuleMap map;
    if (!cfg.coverage.module_map.empty()) map = ModuleMap::load(cfg.coverage.module_map);
    return std::make_unique<LcovCoverageSource>(cfg.coverage.tracefile, std::move(map));
  }
  return std::make_unique<SyntheticCoverageSource>(cfg.coverage.oracle);
}

RuleRegistry make_registry(const CampaignConfig& cfg) {
  RuleRegistry reg = cfg.rules.empty() ? RuleRegistry::sqlite() : RuleRegistry::load_manifest(cfg.rules);
  rule_menu(reg, cfg.dialect, RuleCategory::kDDL);  // UnknownDialect early
  return reg;
}

namespace {

std::string now_iso8601() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json report_outcomes_json(const TestCase& tc, const ExecutionReport& report) {
  json out = json::array();
  for (size_t i = 0; i < report.outcomes.size(); ++i) {
    const auto& o = report.outcomes[i];
    json e = {{"status", to_string(o.status)}, {"rows", o.rows}};
    if (!o.message.empty()) e["message"] = o.message;
    if (i < tc.statements.size()) e["kind"] = to_string(tc.statements[i].kind);
    out.push_back(e);
  }
  return out;
}

}  // namespace

void write_case(const fs::path& dir, const TestCase& tc, const json& extra) {
  write_text_file(dir / (tc.id + ".sql"), tc.sql());
  json side = extra;
  side["id"] = tc.id;
  side["provenance"] = provenance_to_json(tc.provenance);
  side["statements"] = tc.statements.size();
  side["created_at"] = now_iso8601();
  write_text_file(dir / (tc.id + ".json"), side.dump(2) + "\n");
}

std::vector<MutationEvaluator::Record> run_random_rule_mutation(
    size_t iterations, const std::vector<TestCase>& seeds, const RuleRegistry& registry,
    const std::string& dialect, CaseEvaluator& evaluator, CoverageSnapshot& cumulative,
    RewardMode mode, double g_norm, Rng& rng) {
  if (seeds.empty()) throw EmptySeedPool("random-rule mutation needs at least one seed");
  std::vector<std::string> ids;
  for (const auto& s : seeds) ids.push_back(s.id);
  MutationEvaluator eval(seeds, registry, evaluator, cumulative, mode, g_norm);
  run_random_rules(iterations, make_menus(ids, registry, dialect), eval.scorer(), rng);
  return eval.records();
}

namespace {

struct StageOneJob {
  std::string id;
  uint64_t seed = 0;
  std::optional<TestCase> tc;
  Evaluation ev;
  std::exception_ptr error;
};

// Runs fn(job) for every job, on up to `workers` threads when `parallel`.
template <typename Fn>
void for_each_job(std::vector<StageOneJob>& jobs, size_t workers, bool parallel, Fn fn) {
  if (!parallel || workers <= 1 || jobs.size() <= 1) {
    for (auto& j : jobs) fn(j);
    return;
  }
  std::vector<std::thread> threads;
  const size_t n = std::min(workers, jobs.size());
  for (size_t w = 0; w < n; ++w) {
    threads.emplace_back([&, w] {
      for (size_t k = w; k < jobs.size(); k += n) fn(jobs[k]);
    });
  }
  for (auto& t : threads) t.join();
}

std::string case_id(const char* prefix, size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%05zu", prefix, n);
  return buf;
}

}  // namespace

CampaignReport run_campaign(const CampaignConfig& cfg) {
  cfg.validate();
  FeatureCatalog loaded;
  try {
    loaded = load_catalog(cfg.catalog);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("catalog: ") + e.what());
  }
  if (loaded.dialect != cfg.dialect) {
    throw ConfigError("catalog dialect '" + loaded.dialect + "' does not match '" + cfg.dialect + "'");
  }
  auto catalog = std::make_shared<const FeatureCatalog>(std::move(loaded));
  const bool rule_based =
      cfg.mutation == MutationStrategy::kRandomRule || cfg.mutation == MutationStrategy::kMcts;
  std::optional<RuleRegistry> registry;
  if (rule_based) registry = make_registry(cfg);
  auto backend = make_backend(cfg, catalog);
  auto driver = make_driver(cfg);
  auto source = make_coverage_source(cfg);
  const auto timeout = std::chrono::milliseconds(std::llround(cfg.timeout_secs * 1000.0));

  const fs::path out = cfg.output;
  fs::create_directories(out / "cases");
  fs::create_directories(out / "coverage");

  Rng rng(cfg.seed);
  ErrorMemory memory(cfg.memory_capacity);
  CoverageSnapshot cumulative;
  CampaignReport rep;
  rep.dialect = cfg.dialect;
  rep.seed = cfg.seed;
  rep.synthesis = to_string(cfg.synthesis);
  rep.mutation = to_string(cfg.mutation);

  // Stage I: feature-guided synthesis until the budget or a plateau.
  SynthesisConfig scfg;
  scfg.sampling = {cfg.min_features, cfg.max_features, cfg.diversity};
  scfg.strategy = cfg.synthesis;
  scfg.max_retries = cfg.max_retries;
  scfg.digest_k = cfg.digest_k;

  auto& s1 = rep.stage1;
  s1.budget = cfg.budget;
  s1.stop_reason = "budget";
  PlateauDetector plateau(cfg.plateau_window, cfg.plateau_threshold);
  struct Candidate {
    uint64_t gain;
    size_t order;
    TestCase tc;
  };
  std::vector<Candidate> candidates;
  bool stop = false;
  while (!stop && s1.attempted < cfg.budget) {
    const size_t batch = std::min(cfg.workers, cfg.budget - s1.attempted);
    std::vector<StageOneJob> jobs(batch);
    for (size_t k = 0; k < batch; ++k) {
      jobs[k].id = case_id("s", s1.attempted + k);
      jobs[k].seed = rng.next();
    }
    const ErrorMemory snapshot = memory;
    for_each_job(jobs, cfg.workers, backend->order_independent(), [&](StageOneJob& job) {
      try {
        Rng jr(job.seed);
        job.tc = synthesize_one(*catalog, snapshot, *backend, jr, scfg, job.id);
      } catch (const SynthesisFailure&) {
      } catch (const BackendRefusal&) {
      } catch (...) {
        job.error = std::current_exception();
      }
    });
    for (auto& job : jobs) {
      if (job.error) std::rethrow_exception(job.error);
    }
    for_each_job(jobs, cfg.workers, source->concurrent(), [&](StageOneJob& job) {
      if (!job.tc) return;
      try {
        job.ev.report = driver->execute_case(*job.tc, timeout);
        job.ev.outcome = classify_outcome(job.ev.report);
        job.ev.coverage = source->collect(*job.tc, job.ev.report);
      } catch (...) {
        job.error = std::current_exception();
      }
    });
    for (auto& job : jobs) {
      if (job.error) std::rethrow_exception(job.error);
    }

    for (auto& job : jobs) {
      ++s1.attempted;
      if (!job.tc) {
        ++s1.failures;
        continue;
      }
      ++s1.synthesized;
      ++s1.outcomes[to_string(job.ev.outcome)];
      record_failures(memory, *job.tc, job.ev.report);
      const uint64_t gain = diff_new_branches(cumulative, job.ev.coverage);
      cumulative = merge(cumulative, job.ev.coverage);
      s1.series.push_back(cumulative.rates());
      write_case(out / "cases", *job.tc,
                 {{"stage", 1},
                  {"outcome", to_string(job.ev.outcome)},
                  {"new_branches", gain},
                  {"results", report_outcomes_json(*job.tc, job.ev.report)}});
      if (job.ev.outcome == OutcomeClass::kPass) {
        candidates.push_back({gain, candidates.size(), *job.tc});
      }
      if (plateau.push(gain)) {
        s1.stop_reason = "plateau";
        s1.transition_index = s1.attempted;
        stop = true;
        break;
      }
    }
  }
  s1.coverage = cumulative.rates();
  write_text_file(out / "coverage" / "stage1.info", render_lcov(cumulative));

  // Seed pool: passing cases ranked by their own new-branch contribution.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.gain > b.gain; });
  std::vector<TestCase> seeds;
  for (size_t k = 0; k < candidates.size() && k < cfg.seed_pool_cap; ++k) {
    seeds.push_back(candidates[k].tc);
  }

  // Stage II.
  if (cfg.mutation != MutationStrategy::kNone) {
    StageTwoReport s2;
    s2.strategy = to_string(cfg.mutation);
    s2.seed_pool = seeds.size();
    s2.stop_reason = "iterations";
    HarnessEvaluator evaluator(*driver, *source, timeout);
    std::vector<MutationEvaluator::Record> records;
    auto note = [&](const MutationEvaluator::Record& rec) {
      ++s2.evaluations;
      ++s2.outcomes[to_string(rec.outcome)];
      s2.series.push_back(cumulative.rates());
      write_case(out / "cases", rec.mutated,
                 {{"stage", 2},
                  {"outcome", to_string(rec.outcome)},
                  {"reward", rec.reward.value},
                  {"new_branches", rec.reward.new_branches},
                  {"results", report_outcomes_json(rec.mutated, rec.report)}});
    };

    if (seeds.empty()) {
      s2.stop_reason = "no_seeds";
    } else if (rule_based) {
      std::vector<std::string> ids;
      for (const auto& s : seeds) ids.push_back(s.id);
      const ActionMenus menus = make_menus(ids, *registry, cfg.dialect);
      MutationEvaluator eval(seeds, *registry, evaluator, cumulative, cfg.reward,
                             static_cast<double>(std::max<uint64_t>(cfg.et_threshold, 1)), &memory);
      eval.on_record = note;
      if (cfg.mutation == MutationStrategy::kMcts) {
        SearchConfig sc;
        sc.c = cfg.c;
        sc.iterations = cfg.iterations;
        sc.window = cfg.et_window;
        sc.threshold = cfg.et_threshold;
        sc.reward = cfg.reward;
        SearchTree tree(menus);
        const SearchResult res = run_search(sc, tree, eval.scorer(), rng);
        s2.stop_reason = res.stop_reason;
        s2.tree = summarize(tree);
        write_text_file(out / "tree.json", tree.dump().dump(2) + "\n");
      } else {
        run_random_rules(cfg.iterations, menus, eval.scorer(), rng);
      }
      records = eval.records();
    } else {
      // Simple-instruction mutation: ask the backend to mutate a seed.
      for (size_t it = 0; it < cfg.iterations; ++it) {
        const TestCase& seed = seeds[rng.below(seeds.size())];
        const PromptBundle prompt = build_mutation_prompt(cfg.dialect, seed);
        GenerationRequest req;
        req.system_prompt = prompt.system_prompt;
        req.user_prompt = prompt.user_prompt;
        req.seed = rng.next();
        MutationEvaluator::Record rec;
        rec.mutated.id = case_id("m", it);
        rec.mutated.provenance = Mutated{seed.id, {"llm.simple_instruction"}};
        try {
          for (const auto& text : extract_sql(backend->generate(req).raw_text)) {
            try {
              rec.mutated.statements.push_back(classify(text));
            } catch (const Error&) {
            }
          }
        } catch (const NoSqlFound&) {
        } catch (const BackendRefusal&) {
        }
        rec.reward.case_id = rec.mutated.id;
        rec.reward.trajectory.seed = static_cast<size_t>(&seed - seeds.data());
        if (rec.mutated.statements.empty()) {
          ++s2.evaluations;
          ++s2.outcomes["NoSql"];
          s2.series.push_back(cumulative.rates());
          continue;
        }
        Evaluation ev = evaluator.evaluate(rec.mutated);
        rec.outcome = ev.outcome;
        rec.reward.new_branches = diff_new_branches(cumulative, ev.coverage);
        cumulative = merge(cumulative, ev.coverage);
        if (ev.outcome != OutcomeClass::kPass) {
          record_failures(memory, rec.mutated, ev.report);
        } else if (cfg.reward == RewardMode::kIncrementalNormalized) {
          rec.reward.value = std::min(
              1.0, static_cast<double>(rec.reward.new_branches) /
                       static_cast<double>(std::max<uint64_t>(cfg.et_threshold, 1)));
        } else {
          rec.reward.value = ev.coverage.branches().rate();
        }
        rec.coverage = std::move(ev.coverage);
        rec.report = std::move(ev.report);
        note(rec);
        records.push_back(std::move(rec));
      }
    }

    std::vector<const MutationEvaluator::Record*> ranked;
    for (const auto& r : records) ranked.push_back(&r);
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto* a, const auto* b) {
      return a->reward.value > b->reward.value;
    });
    for (size_t k = 0; k < ranked.size() && k < 10; ++k) {
      const auto& rec = *ranked[k];
      TopCase tc;
      tc.id = rec.mutated.id;
      tc.reward = rec.reward.value;
      tc.new_branches = rec.reward.new_branches;
      if (const auto* m = std::get_if<Mutated>(&rec.mutated.provenance)) {
        tc.seed = m->parent_id;
        tc.rules = m->rules;
      }
      tc.outcome = to_string(rec.outcome);
      s2.top_cases.push_back(std::move(tc));
    }
    s2.coverage = cumulative.rates();
    rep.stage2 = std::move(s2);
  }

  rep.final_coverage = cumulative.rates();
  rep.final_branches = cumulative.branches();
  for (const auto& m : module_rates(cumulative, source->module_map())) {
    rep.modules.push_back({m.module, m.lines, m.functions, m.branches});
  }
  for (const auto& e : memory.top(cfg.digest_k)) {
    rep.error_digest.push_back({to_string(e.kind), e.normalized_message, e.occurrence_count});
  }
  write_text_file(out / "coverage" / "final.info", render_lcov(cumulative));
  write_text_file(out / "report.json", render_report(rep, ReportFormat::kJson));
  write_text_file(out / "report.txt", render_report(rep, ReportFormat::kText));
  return rep;
}

}  // namespace mist
