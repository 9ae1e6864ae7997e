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

#include "mist/mcts.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mist/error.h"

namespace mist {

const char* to_string(RewardMode mode) {
  return mode == RewardMode::kAbsoluteRate ? "absolute" : "incremental";
}

RewardMode reward_mode_from_string(std::string_view text) {
  if (text == "incremental") return RewardMode::kIncrementalNormalized;
  if (text == "absolute") return RewardMode::kAbsoluteRate;
  throw ConfigError("reward mode must be \"incremental\" or \"absolute\", got '" +
                    std::string(text) + "'");
}

int Trajectory::depth() const {
  if (!seed) return 0;
  if (!ddl) return 1;
  if (!dml) return 2;
  if (!dql) return 3;
  return 4;
}

nlohmann::json trajectory_to_json(const Trajectory& t, const std::vector<std::string>& seed_ids) {
  auto opt = [](const std::optional<std::string>& s) {
    return s ? nlohmann::json(*s) : nlohmann::json();
  };
  nlohmann::json j;
  j["seed"] = t.seed ? nlohmann::json(*t.seed < seed_ids.size() ? seed_ids[*t.seed]
                                                                 : std::to_string(*t.seed))
                     : nlohmann::json();
  j["ddl"] = opt(t.ddl);
  j["dml"] = opt(t.dml);
  j["dql"] = opt(t.dql);
  return j;
}

namespace {

void init_node(Node& n, size_t action_count) {
  n.edges.assign(action_count, {});
  n.children.resize(action_count);
  n.untried.resize(action_count);
  for (size_t a = 0; a < action_count; ++a) n.untried[a] = a;
}

Trajectory extend(const Trajectory& t, int depth, size_t action, const ActionMenus& menus) {
  Trajectory out = t;
  const auto& label = menus.at_depth(depth)[action];
  switch (depth) {
    case 0:
      out.seed = action;
      break;
    case 1:
      out.ddl = label;
      break;
    case 2:
      out.dml = label;
      break;
    default:
      out.dql = label;
      break;
  }
  return out;
}

}  // namespace

SearchTree::SearchTree(ActionMenus menus) : menus_(std::move(menus)), root_(std::make_unique<Node>()) {
  for (const auto& m : menus_.rules) {
    if (m.empty()) throw ConfigError("every rule layer needs at least one action");
  }
  init_node(*root_, menus_.seeds.size());
}

void SearchTree::prune_seed(size_t seed) { pruned_.insert(seed); }

Node* SearchTree::add_child(Node& v, size_t a) {
  auto child = std::make_unique<Node>();
  child->depth = v.depth + 1;
  child->trajectory = extend(v.trajectory, v.depth, a, menus_);
  child->parent = &v;
  child->parent_action = a;
  if (!child->terminal()) init_node(*child, menus_.at_depth(child->depth).size());
  v.children[a] = std::move(child);
  ++node_count_;
  return v.children[a].get();
}

namespace {

nlohmann::json dump_node(const Node& n, const ActionMenus& menus) {
  nlohmann::json j;
  j["depth"] = n.depth;
  j["trajectory"] = trajectory_to_json(n.trajectory, menus.seeds);
  j["N"] = n.visits;
  j["exhausted"] = n.exhausted;
  nlohmann::json actions = nlohmann::json::array();
  nlohmann::json children = nlohmann::json::array();
  if (!n.terminal()) {
    const auto& labels = menus.at_depth(n.depth);
    for (size_t a = 0; a < n.edges.size(); ++a) {
      if (n.edges[a].visits == 0 && !n.children[a]) continue;
      actions.push_back({{"action", labels[a]}, {"N", n.edges[a].visits}, {"R", n.edges[a].reward}});
      if (n.children[a]) children.push_back(dump_node(*n.children[a], menus));
    }
  }
  j["actions"] = actions;
  j["children"] = children;
  return j;
}

}  // namespace

nlohmann::json SearchTree::dump() const {
  nlohmann::json j;
  j["nodes"] = node_count_;
  nlohmann::json pruned = nlohmann::json::array();
  for (size_t s : pruned_) pruned.push_back(menus_.seeds[s]);
  j["pruned_seeds"] = pruned;
  j["root"] = dump_node(*root_, menus_);
  return j;
}

double uct_score(uint64_t node_visits, const EdgeStats& edge, double c) {
  if (edge.visits == 0) return kInfiniteScore;
  const double n = static_cast<double>(edge.visits);
  const double parent = static_cast<double>(std::max<uint64_t>(node_visits, 1));
  return edge.reward / n + c * std::sqrt(std::log(parent) / n);
}

double uct_score(const Node& v, size_t action, double c) {
  return uct_score(v.visits, v.edges.at(action), c);
}

namespace {

bool has_open_untried(const SearchTree& tree, const Node& v) {
  return std::any_of(v.untried.begin(), v.untried.end(),
                     [&](size_t a) { return !tree.masked(v, a); });
}

}  // namespace

Node* select(SearchTree& tree, double c) {
  Node* v = &tree.root();
  while (true) {
    if (!v->terminal() && !v->exhausted && has_open_untried(tree, *v)) return v;
    size_t best = v->edges.size();
    double best_score = -kInfiniteScore;
    if (!v->terminal() && !v->exhausted) {
      for (size_t a = 0; a < v->children.size(); ++a) {
        const Node* child = v->children[a].get();
        if (!child || child->exhausted || tree.masked(*v, a)) continue;
        const double s = uct_score(*v, a, c);
        if (s > best_score) {
          best_score = s;
          best = a;
        }
      }
    }
    if (best == v->edges.size()) {
      // Nothing left below v: retire it and restart from the root.
      if (v->depth == 0) throw SearchExhausted("every trajectory is pruned or explored");
      v->exhausted = true;
      v = &tree.root();
      continue;
    }
    v = v->children[best].get();
  }
}

std::pair<Node*, size_t> expand(SearchTree& tree, Node& v, Rng& rng) {
  if (v.terminal()) throw NoUntriedAction("terminal node has no actions");
  std::vector<size_t> open;
  for (size_t a : v.untried) {
    if (!tree.masked(v, a)) open.push_back(a);
  }
  if (open.empty()) throw NoUntriedAction("every action of this node has been tried");
  const size_t a = open[rng.below(open.size())];
  v.untried.erase(std::find(v.untried.begin(), v.untried.end(), a));
  return {tree.add_child(v, a), a};
}

Trajectory rollout(const Node& v, const ActionMenus& menus, Rng& rng) {
  Trajectory t = v.trajectory;
  for (int d = v.depth; d < kTerminalDepth; ++d) {
    const auto& menu = menus.at_depth(d);
    t = extend(t, d, rng.below(menu.size()), menus);
  }
  return t;
}

void backpropagate(Node& leaf, double value) {
  ++leaf.visits;
  for (Node* n = &leaf; n->parent; n = n->parent) {
    Node& p = *n->parent;
    auto& e = p.edges[n->parent_action];
    e.reward += value;
    ++e.visits;
    ++p.visits;
  }
}

EarlyTermination::EarlyTermination(size_t window, uint64_t threshold)
    : window_(window), threshold_(threshold) {
  if (window_ == 0) throw ConfigError("early-termination window must be positive");
}

bool early_terminate(const std::vector<uint64_t>& gains, size_t window, uint64_t threshold) {
  if (window == 0 || gains.size() < window) return false;
  uint64_t sum = 0;
  for (size_t k = gains.size() - window; k < gains.size(); ++k) sum += gains[k];
  return sum < threshold;
}

bool EarlyTermination::record(size_t seed, uint64_t gain) {
  if (pruned(seed)) return false;
  auto& w = gains_[seed];
  w.push_back(gain);
  if (w.size() > window_) w.pop_front();
  if (early_terminate(std::vector<uint64_t>(w.begin(), w.end()), window_, threshold_)) {
    pruned_.insert(seed);
    return true;
  }
  return false;
}

nlohmann::json tree_summary_to_json(const TreeSummary& s) {
  nlohmann::json actions = nlohmann::json::array();
  for (const auto& a : s.root_actions) {
    actions.push_back({{"action", a.action}, {"N", a.visits}, {"R", a.reward}});
  }
  return {{"root_visits", s.root_visits}, {"nodes", s.nodes},
          {"max_depth", s.max_depth},     {"pruned_seeds", s.pruned_seeds},
          {"root_actions", actions}};
}

TreeSummary tree_summary_from_json(const nlohmann::json& j) {
  TreeSummary s;
  s.root_visits = j.at("root_visits").get<uint64_t>();
  s.nodes = j.at("nodes").get<size_t>();
  s.max_depth = j.at("max_depth").get<int>();
  s.pruned_seeds = j.at("pruned_seeds").get<std::vector<std::string>>();
  for (const auto& a : j.at("root_actions")) {
    s.root_actions.push_back({a.at("action").get<std::string>(), a.at("N").get<uint64_t>(),
                              a.at("R").get<double>()});
  }
  return s;
}

TreeSummary summarize(const SearchTree& tree, size_t top) {
  TreeSummary s;
  const Node& root = tree.root();
  s.root_visits = root.visits;
  s.nodes = tree.node_count();
  std::vector<const Node*> stack = {&root};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    s.max_depth = std::max(s.max_depth, n->depth);
    for (const auto& c : n->children) {
      if (c) stack.push_back(c.get());
    }
  }
  for (size_t p : tree.pruned_seeds()) s.pruned_seeds.push_back(tree.menus().seeds[p]);
  std::vector<size_t> order(root.edges.size());
  for (size_t a = 0; a < order.size(); ++a) order[a] = a;
  std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) {
    return root.edges[x].visits > root.edges[y].visits;
  });
  for (size_t k = 0; k < std::min(top, order.size()); ++k) {
    const auto& e = root.edges[order[k]];
    if (e.visits == 0) break;
    s.root_actions.push_back({tree.menus().seeds[order[k]], e.visits, e.reward});
  }
  return s;
}

std::vector<Reward> SearchResult::ranked() const {
  std::vector<Reward> out = rewards;
  std::stable_sort(out.begin(), out.end(),
                   [](const Reward& a, const Reward& b) { return a.value > b.value; });
  return out;
}

SearchResult run_search(const SearchConfig& cfg, SearchTree& tree, const TrajectoryScorer& score,
                        Rng& rng) {
  if (tree.menus().seeds.empty()) throw EmptySeedPool("stage II needs at least one seed");
  if (cfg.c < 0) throw ConfigError("exploration constant must be non-negative");
  EarlyTermination et(std::max<size_t>(cfg.window, 1), cfg.threshold);
  SearchResult result;
  result.stop_reason = "iterations";
  for (size_t it = 0; it < cfg.iterations; ++it) {
    Node* v;
    try {
      v = select(tree, cfg.c);
    } catch (const SearchExhausted&) {
      result.stop_reason = "exhausted";
      break;
    }
    Node* leaf = expand(tree, *v, rng).first;
    const Trajectory theta = rollout(*leaf, tree.menus(), rng);
    Reward r = score(theta, rng);
    r.value = std::clamp(r.value, 0.0, 1.0);
    backpropagate(*leaf, r.value);
    if (leaf->terminal()) leaf->exhausted = true;
    if (cfg.window > 0 && et.record(*theta.seed, r.new_branches)) tree.prune_seed(*theta.seed);
    result.rewards.push_back(std::move(r));
    ++result.iterations;
  }
  return result;
}

SearchResult run_random_rules(size_t iterations, const ActionMenus& menus,
                              const TrajectoryScorer& score, Rng& rng) {
  if (menus.seeds.empty()) throw EmptySeedPool("random-rule mutation needs at least one seed");
  SearchResult result;
  result.stop_reason = "iterations";
  Node origin;
  for (size_t it = 0; it < iterations; ++it) {
    Reward r = score(rollout(origin, menus, rng), rng);
    r.value = std::clamp(r.value, 0.0, 1.0);
    result.rewards.push_back(std::move(r));
    ++result.iterations;
  }
  return result;
}

ActionMenus make_menus(const std::vector<std::string>& seed_ids, const RuleRegistry& registry,
                       const std::string& dialect) {
  ActionMenus m;
  m.seeds = seed_ids;
  m.rules[0] = rule_menu(registry, dialect, RuleCategory::kDDL);
  m.rules[1] = rule_menu(registry, dialect, RuleCategory::kDML);
  m.rules[2] = rule_menu(registry, dialect, RuleCategory::kDQL);
  return m;
}

TestCase materialize(const Trajectory& t, const std::vector<TestCase>& seeds,
                     const RuleRegistry& registry, Rng& rng, std::string id) {
  if (!t.complete()) throw ConfigError("cannot materialize a partial trajectory");
  TestCase tc = seeds.at(*t.seed);
  const std::array<std::pair<const std::string*, RuleCategory>, 3> steps = {
      std::pair{&*t.ddl, RuleCategory::kDDL}, std::pair{&*t.dml, RuleCategory::kDML},
      std::pair{&*t.dql, RuleCategory::kDQL}};
  for (const auto& [rule_id, cat] : steps) {
    const MutationRule* rule = &registry.get(*rule_id);
    if (!rule->applicable(tc)) rule = &registry.get(noop_rule_id(cat));
    tc = rule->apply(tc, rng).mutated;
  }
  tc.id = std::move(id);
  return tc;
}

Evaluation SyntheticEvaluator::evaluate(const TestCase& tc) {
  Evaluation ev;
  ev.report.outcomes.assign(tc.statements.size(), StatementOutcome{});
  ev.outcome = OutcomeClass::kPass;
  ev.coverage = oracle_.evaluate(tc);
  return ev;
}

void record_failures(ErrorMemory& memory, const TestCase& tc, const ExecutionReport& report) {
  for (size_t i = 0; i < report.outcomes.size(); ++i) {
    const auto& o = report.outcomes[i];
    ErrorKind kind;
    switch (o.status) {
      case StatementStatus::kSyntaxError:
        kind = ErrorKind::kSyntax;
        break;
      case StatementStatus::kRuntimeError:
        kind = ErrorKind::kRuntime;
        break;
      case StatementStatus::kCrash:
        kind = ErrorKind::kCrash;
        break;
      default:
        continue;
    }
    const std::string sql = i < tc.statements.size() ? tc.statements[i].text : std::string();
    const std::string message = o.message.empty() ? std::string(to_string(o.status)) : o.message;
    memory.record(kind, message, sql);
  }
}

MutationEvaluator::MutationEvaluator(const std::vector<TestCase>& seeds,
                                     const RuleRegistry& registry, CaseEvaluator& evaluator,
                                     CoverageSnapshot& cumulative, RewardMode mode, double g_norm,
                                     ErrorMemory* memory)
    : seeds_(seeds),
      registry_(registry),
      evaluator_(evaluator),
      cumulative_(cumulative),
      mode_(mode),
      g_norm_(g_norm),
      memory_(memory) {
  if (g_norm_ <= 0) throw ConfigError("reward normaliser must be positive");
}

Reward MutationEvaluator::operator()(const Trajectory& t, Rng& rng) {
  char id[32];
  std::snprintf(id, sizeof id, "%s%05zu", id_prefix.c_str(), records_.size());
  TestCase tc = materialize(t, seeds_, registry_, rng, id);
  Evaluation ev = evaluator_.evaluate(tc);
  Reward r;
  r.trajectory = t;
  r.case_id = tc.id;
  r.new_branches = diff_new_branches(cumulative_, ev.coverage);
  cumulative_ = merge(cumulative_, ev.coverage);
  if (ev.outcome != OutcomeClass::kPass) {
    r.value = 0;
    if (memory_) record_failures(*memory_, tc, ev.report);
  } else if (mode_ == RewardMode::kIncrementalNormalized) {
    r.value = std::min(1.0, static_cast<double>(r.new_branches) / g_norm_);
  } else {
    r.value = ev.coverage.branches().rate();
  }
  records_.push_back({std::move(tc), r, ev.outcome, std::move(ev.coverage), std::move(ev.report)});
  if (on_record) on_record(records_.back());
  return r;
}

}  // namespace mist
