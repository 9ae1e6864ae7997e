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

#ifndef MIST_MUTATION_RULES_H_
#define MIST_MUTATION_RULES_H_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "mist/rng.h"
#include "mist/test_case.h"

namespace mist {

enum class RuleCategory { kDDL, kDML, kDQL };

const char* to_string(RuleCategory category);
RuleCategory rule_category_from_string(std::string_view text);

struct MutationOutcome {
  TestCase mutated;
  std::string applied_rule;
  // Indexes into mutated.statements of new or rewritten statements.
  std::vector<size_t> changed_statements;
};

// Intermediate form handed to rule transforms: the case's statements plus
// lazily useful derived views.
struct RuleSubject;

struct RuleEdit {
  std::vector<std::string> statements;
  std::vector<size_t> changed;
};

class MutationRule {
 public:
  using Predicate = std::function<bool(const RuleSubject&)>;
  using Transform = std::function<RuleEdit(const RuleSubject&, Rng&)>;

  MutationRule(std::string id, RuleCategory category, std::string description,
               int statement_delta, Predicate applicable, Transform transform,
               std::set<std::string> dialects = {"sqlite"});

  const std::string& id() const { return id_; }
  RuleCategory category() const { return category_; }
  const std::string& description() const { return description_; }
  const std::set<std::string>& dialects() const { return dialects_; }
  // Statements added by one application.
  int statement_delta() const { return statement_delta_; }
  bool is_noop() const { return !transform_; }

  bool applicable(const TestCase& tc) const;
  // The result keeps the input id; its provenance records the input's root
  // seed and appends this rule. Throws NotApplicable.
  MutationOutcome apply(const TestCase& tc, Rng& rng) const;

 private:
  std::string id_;
  RuleCategory category_;
  std::string description_;
  int statement_delta_;
  Predicate applicable_;
  Transform transform_;
  std::set<std::string> dialects_;
};

class RuleRegistry {
 public:
  // Every rule shipped for SQLite, all enabled.
  static RuleRegistry sqlite();
  // Shipped rules restricted to a manifest {"dialect", "enabled": [ids]}.
  // NoOp rules are always present.
  static RuleRegistry from_manifest(const nlohmann::json& manifest);
  static RuleRegistry load_manifest(const std::filesystem::path& path);

  const MutationRule& get(const std::string& id) const;
  bool contains(const std::string& id) const { return by_id_.count(id) > 0; }
  std::vector<const MutationRule*> rules(const std::string& dialect, RuleCategory category) const;
  std::set<std::string> dialects() const;
  nlohmann::json manifest(const std::string& dialect) const;

 private:
  void add(std::shared_ptr<const MutationRule> rule);

  std::map<std::string, std::shared_ptr<const MutationRule>> by_id_;
};

std::string noop_rule_id(RuleCategory category);

bool applicable(const MutationRule& rule, const TestCase& tc);
MutationOutcome apply(const MutationRule& rule, const TestCase& tc, Rng& rng);

// Rule ids for a layer of the search tree, sorted, NoOp included.
// Throws UnknownDialect.
std::vector<std::string> rule_menu(const RuleRegistry& registry, const std::string& dialect,
                                   RuleCategory category);

}  // namespace mist

#endif  // MIST_MUTATION_RULES_H_
