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

// Command-line front end: campaign orchestration plus small utilities for
// synthesis, single mutations, lcov handling and search-tree inspection.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mist/campaign.h"
#include "mist/coverage.h"
#include "mist/error.h"
#include "mist/json_util.h"
#include "mist/mcts.h"
#include "mist/synthesizer.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int exit_code_for(const mist::Error& e) {
  static const std::vector<std::string> config = {
      "ConfigError", "ParseError",    "ValidationError", "EmptyCatalog",
      "PatternError", "UnknownDialect", "UnknownRule",   "UniverseMismatch"};
  static const std::vector<std::string> backend = {"TransportError", "ProtocolError",
                                                   "BackendRefusal", "ScriptExhausted"};
  const auto has = [&](const std::vector<std::string>& v) {
    return std::find(v.begin(), v.end(), e.kind()) != v.end();
  };
  if (has(config)) return 2;
  if (has(backend)) return 3;
  if (e.kind() == "DriverUnavailable") return 4;
  return 1;
}

std::string default_catalog() {
  const fs::path local = "data/sqlite_catalog.json";
  if (fs::exists(local)) return local.string();
  return std::string(MIST_DATA_DIR) + "/sqlite_catalog.json";
}

// Every campaign flag is optional so that an explicit flag can be told apart
// from a default and layered over the config file.
struct CampaignFlags {
  std::string config;
  std::optional<std::string> dialect, catalog, rules, backend, mock_script, reward, output,
      synthesis, mutation, driver, coverage, tracefile, module_map, oracle;
  std::optional<size_t> budget, min_features, max_features, iterations, et_window, plateau_window,
      workers, seed_pool_cap, memory_capacity, digest_k, max_retries;
  std::optional<uint64_t> et_threshold, plateau_threshold, seed;
  std::optional<double> c, timeout;
  std::optional<bool> diversity;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "campaign config JSON")->check(CLI::ExistingFile);
    app->add_option("--dialect", dialect);
    app->add_option("--catalog", catalog, "feature catalog JSON");
    app->add_option("--rules", rules, "mutation rule manifest JSON");
    app->add_option("--backend", backend, "live | mock | template");
    app->add_option("--mock-script", mock_script, "responses for the mock backend");
    app->add_option("--budget", budget, "stage I case budget");
    app->add_option("--min-features", min_features);
    app->add_option("--max-features", max_features);
    app->add_option("--diversity", diversity, "cross-category enhancement (true|false)");
    app->add_option("--iterations,-T", iterations, "stage II iterations");
    app->add_option("-c,--exploration", c, "UCT exploration constant");
    app->add_option("--reward", reward, "incremental | absolute");
    app->add_option("--et-window", et_window, "early termination window W");
    app->add_option("--et-threshold", et_threshold, "early termination threshold G");
    app->add_option("--plateau-window", plateau_window);
    app->add_option("--plateau-threshold", plateau_threshold);
    app->add_option("--workers", workers);
    app->add_option("--timeout", timeout, "per-case timeout in seconds");
    app->add_option("--output,-o", output, "output directory");
    app->add_option("--seed", seed, "rng seed");
    app->add_option("--synthesis", synthesis, "simple | random-feature | hierarchical");
    app->add_option("--mutation", mutation, "none | simple-instruction | random-rule | mcts");
    app->add_option("--driver", driver, "sqlite | external");
    app->add_option("--coverage", coverage, "synthetic | lcov");
    app->add_option("--tracefile", tracefile, "lcov tracefile written by the target");
    app->add_option("--module-map", module_map, "module attribution map JSON");
    app->add_option("--oracle", oracle, "synthetic oracle config JSON");
    app->add_option("--seed-pool-cap", seed_pool_cap);
    app->add_option("--memory-capacity", memory_capacity);
    app->add_option("--digest-k", digest_k);
    app->add_option("--max-retries", max_retries);
  }

  mist::CampaignConfig resolve() const {
    mist::CampaignConfig cfg;
    bool catalog_set = false;
    if (!config.empty()) {
      cfg = mist::CampaignConfig::load(config);
      catalog_set = mist::read_json_file(config).contains("catalog");
    }
    if (dialect) cfg.dialect = *dialect;
    if (catalog) cfg.catalog = *catalog;
    if (!catalog && !catalog_set) cfg.catalog = default_catalog();
    if (rules) cfg.rules = *rules;
    if (backend) cfg.backend = mist::backend_kind_from_string(*backend);
    if (mock_script) cfg.mock_script = *mock_script;
    if (budget) cfg.budget = *budget;
    if (min_features) cfg.min_features = *min_features;
    if (max_features) cfg.max_features = *max_features;
    if (diversity) cfg.diversity = *diversity;
    if (iterations) cfg.iterations = *iterations;
    if (c) cfg.c = *c;
    if (reward) {
      try {
        cfg.reward = mist::reward_mode_from_string(*reward);
      } catch (const mist::Error& e) {
        throw mist::ConfigError(e.what());
      }
    }
    if (et_window) cfg.et_window = *et_window;
    if (et_threshold) cfg.et_threshold = *et_threshold;
    if (plateau_window) cfg.plateau_window = *plateau_window;
    if (plateau_threshold) cfg.plateau_threshold = *plateau_threshold;
    if (workers) cfg.workers = *workers;
    if (timeout) cfg.timeout_secs = *timeout;
    if (output) cfg.output = *output;
    if (seed) cfg.seed = *seed;
    if (synthesis) cfg.synthesis = mist::synthesis_strategy_from_string(*synthesis);
    if (mutation) cfg.mutation = mist::mutation_strategy_from_string(*mutation);
    if (driver) cfg.driver = *driver;
    if (coverage) cfg.coverage.kind = *coverage;
    if (tracefile) cfg.coverage.tracefile = *tracefile;
    if (module_map) cfg.coverage.module_map = *module_map;
    if (oracle) {
      cfg.coverage.oracle = mist::SyntheticOracleConfig::from_json(mist::read_json_file(*oracle));
    }
    if (seed_pool_cap) cfg.seed_pool_cap = *seed_pool_cap;
    if (memory_capacity) cfg.memory_capacity = *memory_capacity;
    if (digest_k) cfg.digest_k = *digest_k;
    if (max_retries) cfg.max_retries = *max_retries;
    cfg.validate();
    return cfg;
  }
};

void print_counts(const char* label, const mist::Counts& c) {
  std::cout << label << c.covered << "/" << c.instrumented << " ("
            << mist::format_percent(c.rate()) << ")\n";
}

void print_tree(const json& node, size_t depth, size_t max_depth) {
  const std::string indent(2 * depth, ' ');
  for (const auto& a : node.value("actions", json::array())) {
    std::cout << indent << a.at("action").get<std::string>() << "  N=" << a.at("N")
              << "  R=" << a.at("R") << "\n";
  }
  if (depth + 1 >= max_depth) return;
  for (const auto& child : node.value("children", json::array())) {
    std::cout << indent << "- " << child.at("trajectory").dump() << " N=" << child.at("N")
              << (child.value("exhausted", false) ? " (exhausted)" : "") << "\n";
    print_tree(child, depth + 1, max_depth);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mist: coverage-guided SQL test generation"};
  app.require_subcommand(1);

  // campaign run
  auto* campaign = app.add_subcommand("campaign", "two-stage test generation campaign");
  campaign->require_subcommand(1);
  auto* run = campaign->add_subcommand("run", "run a campaign and write its report");
  CampaignFlags run_flags;
  run_flags.attach(run);
  bool print_json = false;
  run->add_flag("--json", print_json, "print report.json instead of the text report");

  // synthesize
  auto* synth = app.add_subcommand("synthesize", "generate stage I cases without executing them");
  CampaignFlags synth_flags;
  synth_flags.attach(synth);
  size_t synth_count = 1;
  synth->add_option("--count,-n", synth_count, "number of cases");

  // mutate
  auto* mutate = app.add_subcommand("mutate", "apply one DDL/DML/DQL trajectory to a seed case");
  std::string seed_file, ddl_rule, dml_rule, dql_rule, mutate_rules, mutate_dialect = "sqlite";
  uint64_t mutate_seed = 0;
  bool list_rules = false;
  mutate->add_option("seed", seed_file, "seed case SQL file")->check(CLI::ExistingFile);
  mutate->add_option("--ddl", ddl_rule, "DDL rule id");
  mutate->add_option("--dml", dml_rule, "DML rule id");
  mutate->add_option("--dql", dql_rule, "DQL rule id");
  mutate->add_option("--rules", mutate_rules, "rule manifest JSON");
  mutate->add_option("--dialect", mutate_dialect);
  mutate->add_option("--rng-seed", mutate_seed);
  mutate->add_flag("--list", list_rules, "list the rule menus and exit");

  // coverage parse|diff|report
  auto* cov = app.add_subcommand("coverage", "lcov tracefile utilities");
  cov->require_subcommand(1);
  std::string cov_file, cov_other, cov_map;
  bool cov_render = false;
  auto* cov_parse = cov->add_subcommand("parse", "summarize a tracefile");
  cov_parse->add_option("file", cov_file)->required()->check(CLI::ExistingFile);
  cov_parse->add_flag("--render", cov_render, "print the normalized tracefile");
  auto* cov_diff = cov->add_subcommand("diff", "count branches in RUN not covered by BASE");
  cov_diff->add_option("base", cov_file)->required()->check(CLI::ExistingFile);
  cov_diff->add_option("run", cov_other)->required()->check(CLI::ExistingFile);
  auto* cov_report = cov->add_subcommand("report", "per-module coverage table");
  cov_report->add_option("file", cov_file)->required()->check(CLI::ExistingFile);
  cov_report->add_option("--module-map", cov_map, "module attribution map JSON");

  // tree dump
  auto* tree = app.add_subcommand("tree", "search tree inspection");
  tree->require_subcommand(1);
  auto* dump = tree->add_subcommand("dump", "print a tree.json written by an MCTS campaign");
  std::string tree_file;
  size_t tree_depth = 2;
  bool tree_summary = false;
  dump->add_option("file", tree_file)->required()->check(CLI::ExistingFile);
  dump->add_option("--depth", tree_depth, "levels to print");
  dump->add_flag("--summary", tree_summary, "only print node totals");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      const mist::CampaignConfig cfg = run_flags.resolve();
      const mist::CampaignReport report = mist::run_campaign(cfg);
      std::cout << mist::render_report(
          report, print_json ? mist::ReportFormat::kJson : mist::ReportFormat::kText);
      return 0;
    }
    if (*synth) {
      const mist::CampaignConfig cfg = synth_flags.resolve();
      auto catalog = std::make_shared<const mist::FeatureCatalog>(mist::load_catalog(cfg.catalog));
      auto backend = mist::make_backend(cfg, catalog);
      mist::ErrorMemory memory(cfg.memory_capacity);
      mist::SynthesisConfig scfg;
      scfg.sampling = {cfg.min_features, cfg.max_features, cfg.diversity};
      scfg.strategy = cfg.synthesis;
      scfg.max_retries = cfg.max_retries;
      mist::Rng rng(cfg.seed);
      const bool to_dir = synth_flags.output.has_value();
      if (to_dir) fs::create_directories(cfg.output);
      for (size_t k = 0; k < synth_count; ++k) {
        char id[32];
        std::snprintf(id, sizeof id, "s%05zu", k);
        try {
          const auto tc = mist::synthesize_one(*catalog, memory, *backend, rng, scfg, id);
          if (to_dir) {
            mist::write_case(cfg.output, tc, {{"stage", 1}});
          } else {
            std::cout << "-- " << tc.id << "\n" << tc.sql() << "\n";
          }
        } catch (const mist::SynthesisFailure& e) {
          std::cerr << id << ": " << e.what() << "\n";
        }
      }
      return 0;
    }
    if (*mutate) {
      const mist::RuleRegistry registry = mutate_rules.empty()
                                              ? mist::RuleRegistry::sqlite()
                                              : mist::RuleRegistry::load_manifest(mutate_rules);
      if (list_rules) {
        for (auto cat : {mist::RuleCategory::kDDL, mist::RuleCategory::kDML, mist::RuleCategory::kDQL}) {
          std::cout << mist::to_string(cat) << ":\n";
          for (const auto& id : mist::rule_menu(registry, mutate_dialect, cat)) {
            std::cout << "  " << id << "  " << registry.get(id).description() << "\n";
          }
        }
        return 0;
      }
      if (seed_file.empty()) throw mist::ConfigError("mutate needs a seed case file");
      const auto texts = mist::extract_sql(mist::read_text_file(seed_file));
      std::vector<mist::TestCase> seeds = {
          mist::make_case(fs::path(seed_file).stem().string(), texts, mist::Synthesized{})};
      mist::Trajectory t;
      t.seed = 0;
      t.ddl = ddl_rule.empty() ? mist::noop_rule_id(mist::RuleCategory::kDDL) : ddl_rule;
      t.dml = dml_rule.empty() ? mist::noop_rule_id(mist::RuleCategory::kDML) : dml_rule;
      t.dql = dql_rule.empty() ? mist::noop_rule_id(mist::RuleCategory::kDQL) : dql_rule;
      for (const auto* id : {&*t.ddl, &*t.dml, &*t.dql}) registry.get(*id);
      mist::Rng rng(mutate_seed);
      const auto out = mist::materialize(t, seeds, registry, rng, seeds[0].id + "_m");
      std::cout << "-- " << mist::provenance_to_json(out.provenance).dump() << "\n" << out.sql() << "\n";
      return 0;
    }
    if (*cov_parse) {
      const auto snap = mist::parse_lcov(cov_file);
      if (cov_render) {
        std::cout << mist::render_lcov(snap);
        return 0;
      }
      std::cout << "files: " << snap.files.size() << "\n";
      print_counts("lines:     ", snap.lines());
      print_counts("functions: ", snap.functions());
      print_counts("branches:  ", snap.branches());
      return 0;
    }
    if (*cov_diff) {
      std::cout << mist::diff_new_branches(mist::parse_lcov(cov_file), mist::parse_lcov(cov_other))
                << "\n";
      return 0;
    }
    if (*cov_report) {
      const auto snap = mist::parse_lcov(cov_file);
      const mist::ModuleMap map = cov_map.empty() ? mist::ModuleMap{} : mist::ModuleMap::load(cov_map);
      std::cout << "module      line    function branch\n";
      for (const auto& m : mist::module_rates(snap, map)) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%-10s  %-7s %-8s %s\n", m.module.c_str(),
                      mist::format_percent(m.lines.rate()).c_str(),
                      mist::format_percent(m.functions.rate()).c_str(),
                      mist::format_percent(m.branches.rate()).c_str());
        std::cout << buf;
      }
      return 0;
    }
    if (*dump) {
      const json t = mist::read_json_file(tree_file);
      if (tree_summary) {
        size_t nodes = 0, max_depth = 0;
        std::function<void(const json&)> walk = [&](const json& n) {
          ++nodes;
          max_depth = std::max(max_depth, n.value("depth", size_t{0}));
          for (const auto& c : n.value("children", json::array())) walk(c);
        };
        walk(t.at("root"));
        std::cout << "nodes: " << nodes << "\nmax depth: " << max_depth
                  << "\nroot visits: " << t.at("root").at("N")
                  << "\npruned seeds: " << t.value("pruned_seeds", json::array()).dump() << "\n";
        return 0;
      }
      std::cout << "root N=" << t.at("root").at("N") << "\n";
      print_tree(t.at("root"), 0, tree_depth);
      return 0;
    }
  } catch (const mist::Error& e) {
    std::cerr << "mist: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "mist: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
