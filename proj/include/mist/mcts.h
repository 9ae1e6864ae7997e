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

#ifndef MIST_MCTS_H_
#define MIST_MCTS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "mist/coverage.h"
#include "mist/harness.h"
#include "mist/mutation_rules.h"
#include "mist/rng.h"
#include "mist/synthesizer.h"
#include "mist/test_case.h"

namespace mist {

enum class RewardMode { kIncrementalNormalized, kAbsoluteRate };

const char* to_string(RewardMode mode);
RewardMode reward_mode_from_string(std::string_view text);

struct SearchConfig {
  double c = 1.414;
  size_t iterations = 600;
  // Early termination: a seed is pruned once its last `window` evaluations
  // gained fewer than `threshold` new branches in total. 0 disables it.
  size_t window = 10;
  uint64_t threshold = 50;
  RewardMode reward = RewardMode::kIncrementalNormalized;
  // Normaliser for incremental rewards.
  double g_norm = 50;
};

// Depth 0 is the root; layers 1..4 fix the seed, DDL, DML and DQL choices.
inline constexpr int kTerminalDepth = 4;

struct Trajectory {
  std::optional<size_t> seed;  // index into the seed pool
  std::optional<std::string> ddl;
  std::optional<std::string> dml;
  std::optional<std::string> dql;

  int depth() const;
  bool complete() const { return depth() == kTerminalDepth; }
  bool operator==(const Trajectory&) const = default;
};

nlohmann::json trajectory_to_json(const Trajectory& t, const std::vector<std::string>& seed_ids);

struct Reward {
  Trajectory trajectory;
  std::string case_id;
  double value = 0;
  uint64_t new_branches = 0;
};

struct EdgeStats {
  uint64_t visits = 0;
  double reward = 0;
};

struct Node {
  int depth = 0;
  Trajectory trajectory;
  uint64_t visits = 0;
  Node* parent = nullptr;
  size_t parent_action = 0;
  // Indexed by the layer's action menu.
  std::vector<EdgeStats> edges;
  std::vector<std::unique_ptr<Node>> children;
  std::vector<size_t> untried;  // ascending
  bool exhausted = false;

  bool terminal() const { return depth == kTerminalDepth; }
};

// Action menus per layer: seed ids, then the DDL, DML and DQL rule menus.
struct ActionMenus {
  std::vector<std::string> seeds;
  std::array<std::vector<std::string>, 3> rules;

  const std::vector<std::string>& at_depth(int depth) const {
    return depth == 0 ? seeds : rules[static_cast<size_t>(depth - 1)];
  }
};

class SearchTree {
 public:
  explicit SearchTree(ActionMenus menus);

  Node& root() { return *root_; }
  const Node& root() const { return *root_; }
  const ActionMenus& menus() const { return menus_; }

  void prune_seed(size_t seed);
  bool pruned(size_t seed) const { return pruned_.count(seed) > 0; }
  const std::set<size_t>& pruned_seeds() const { return pruned_; }

  // Whether action `a` of `v` is available for selection or expansion.
  bool masked(const Node& v, size_t a) const { return v.depth == 0 && pruned(a); }

  Node* add_child(Node& v, size_t a);
  size_t node_count() const { return node_count_; }
  nlohmann::json dump() const;

 private:
  ActionMenus menus_;
  std::unique_ptr<Node> root_;
  std::set<size_t> pruned_;
  size_t node_count_ = 1;
};

inline constexpr double kInfiniteScore = std::numeric_limits<double>::infinity();

// R/N + c * sqrt(ln N(v) / N(v,a)); unvisited edges score infinity.
double uct_score(uint64_t node_visits, const EdgeStats& edge, double c);
double uct_score(const Node& v, size_t action, double c);

// Walks from the root by UCT argmax (lowest index on ties) until a node with
// an untried action. Fully explored subtrees are marked exhausted and
// skipped. Throws SearchExhausted when nothing remains.
Node* select(SearchTree& tree, double c);

// Uniform untried action. Throws NoUntriedAction.
std::pair<Node*, size_t> expand(SearchTree& tree, Node& v, Rng& rng);

// Fills the remaining layers with uniform draws from the menus.
Trajectory rollout(const Node& v, const ActionMenus& menus, Rng& rng);

// Adds `value` along the path from the root to `leaf`; the leaf also counts
// its own visit.
void backpropagate(Node& leaf, double value);

// Per-seed rolling windows of new-branch gains.
class EarlyTermination {
 public:
  EarlyTermination(size_t window, uint64_t threshold);

  // Records a gain; true when the seed is pruned by this record.
  bool record(size_t seed, uint64_t gain);
  bool pruned(size_t seed) const { return pruned_.count(seed) > 0; }

 private:
  size_t window_;
  uint64_t threshold_;
  std::map<size_t, std::deque<uint64_t>> gains_;
  std::set<size_t> pruned_;
};

// Prune decision for a single window of gains.
bool early_terminate(const std::vector<uint64_t>& window_gains, size_t window, uint64_t threshold);

using TrajectoryScorer = std::function<Reward(const Trajectory&, Rng&)>;

struct TreeSummary {
  uint64_t root_visits = 0;
  size_t nodes = 0;
  int max_depth = 0;
  std::vector<std::string> pruned_seeds;
  // Root actions by visit count, descending.
  struct RootAction {
    std::string action;
    uint64_t visits = 0;
    double reward = 0;
    bool operator==(const RootAction&) const = default;
  };
  std::vector<RootAction> root_actions;

  bool operator==(const TreeSummary&) const = default;
};

nlohmann::json tree_summary_to_json(const TreeSummary& s);
TreeSummary tree_summary_from_json(const nlohmann::json& j);
TreeSummary summarize(const SearchTree& tree, size_t top = 5);

struct SearchResult {
  std::vector<Reward> rewards;  // in evaluation order
  size_t iterations = 0;
  std::string stop_reason;      // "iterations" or "exhausted"

  // Rewards sorted by value, descending; ties keep evaluation order.
  std::vector<Reward> ranked() const;
};

// select -> expand -> rollout -> score -> backpropagate for cfg.iterations,
// pruning seeds by early termination. Stops early, keeping its results, when
// the tree is exhausted. Throws EmptySeedPool.
SearchResult run_search(const SearchConfig& cfg, SearchTree& tree, const TrajectoryScorer& score,
                        Rng& rng);

// Uniform (seed, DDL, DML, DQL) draws with no tree statistics.
SearchResult run_random_rules(size_t iterations, const ActionMenus& menus,
                              const TrajectoryScorer& score, Rng& rng);

ActionMenus make_menus(const std::vector<std::string>& seed_ids, const RuleRegistry& registry,
                       const std::string& dialect);

// Applies a trajectory's rules to its seed in DDL, DML, DQL order; a rule
// that does not apply degrades to its category's NoOp.
TestCase materialize(const Trajectory& t, const std::vector<TestCase>& seeds,
                     const RuleRegistry& registry, Rng& rng, std::string id);

// Executes a case and reports coverage; implemented over the harness plus a
// coverage source, or the synthetic oracle alone.
struct Evaluation {
  ExecutionReport report;
  OutcomeClass outcome = OutcomeClass::kPass;
  CoverageSnapshot coverage;
};

class CaseEvaluator {
 public:
  virtual ~CaseEvaluator() = default;
  virtual Evaluation evaluate(const TestCase& tc) = 0;
};

class SyntheticEvaluator : public CaseEvaluator {
 public:
  explicit SyntheticEvaluator(SyntheticOracle oracle) : oracle_(std::move(oracle)) {}
  Evaluation evaluate(const TestCase& tc) override;

 private:
  SyntheticOracle oracle_;
};

// Records every failing statement of a report into the memory.
void record_failures(ErrorMemory& memory, const TestCase& tc, const ExecutionReport& report);

// The coverage-rewarded evaluation shared by MCTS and the random-rule
// baseline: materialize, execute, merge into the cumulative snapshot, score.
class MutationEvaluator {
 public:
  struct Record {
    TestCase mutated;
    Reward reward;
    OutcomeClass outcome;
    CoverageSnapshot coverage;
    ExecutionReport report;
  };

  MutationEvaluator(const std::vector<TestCase>& seeds, const RuleRegistry& registry,
                    CaseEvaluator& evaluator, CoverageSnapshot& cumulative, RewardMode mode,
                    double g_norm, ErrorMemory* memory = nullptr);

  Reward operator()(const Trajectory& t, Rng& rng);
  TrajectoryScorer scorer() {
    return [this](const Trajectory& t, Rng& rng) { return (*this)(t, rng); };
  }
  const std::vector<Record>& records() const { return records_; }
  // Called after each evaluation, e.g. to persist the case.
  std::function<void(const Record&)> on_record;
  std::string id_prefix = "m";

 private:
  const std::vector<TestCase>& seeds_;
  const RuleRegistry& registry_;
  CaseEvaluator& evaluator_;
  CoverageSnapshot& cumulative_;
  RewardMode mode_;
  double g_norm_;
  ErrorMemory* memory_;
  std::vector<Record> records_;
};

}  // namespace mist

#endif  // MIST_MCTS_H_
