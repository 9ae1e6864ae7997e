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

#ifndef MIST_TEST_CASE_H_
#define MIST_TEST_CASE_H_

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "mist/feature_catalog.h"
#include "mist/sql_model.h"

namespace mist {

struct Synthesized {
  // Absent for the feature-free simple-instruction strategy.
  std::optional<FeatureSelection> selection;

  bool operator==(const Synthesized&) const = default;
};

struct Mutated {
  std::string parent_id;
  // Rule ids in application order; NoOp ids record degraded layers.
  std::vector<std::string> rules;

  bool operator==(const Mutated&) const = default;
};

using Provenance = std::variant<Synthesized, Mutated>;

struct TestCase {
  std::string id;
  std::vector<ClassifiedStatement> statements;
  Provenance provenance;

  // Statements joined by newlines; the persisted .sql form.
  std::string sql() const;
  std::vector<std::string> statement_texts() const;
};

// Classifies each text; throws EmptyStatement on blank input.
TestCase make_case(std::string id, const std::vector<std::string>& statements,
                   Provenance provenance);

nlohmann::json provenance_to_json(const Provenance& p);

}  // namespace mist

#endif  // MIST_TEST_CASE_H_
