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

#ifndef MIST_FEATURE_CATALOG_H_
#define MIST_FEATURE_CATALOG_H_

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mist/rng.h"

namespace mist {

struct Feature {
  std::string name;
  std::string description;
  // Representative SQL fragment. May carry {int}, {real}, {text}, {ident}
  // placeholders that the template backend instantiates.
  std::string syntax_pattern;

  bool operator==(const Feature&) const = default;
};

struct FeatureCategory {
  std::string name;
  std::vector<Feature> features;

  bool operator==(const FeatureCategory&) const = default;
};

// Three-level feature tree: dialect -> category -> feature. Immutable after
// load; safe to share between workers.
struct FeatureCatalog {
  std::string dialect;
  std::vector<FeatureCategory> categories;

  size_t feature_count() const;
};

struct SelectedFeature {
  std::string category;
  Feature feature;

  bool operator==(const SelectedFeature&) const = default;
};

struct FeatureSelection {
  std::string dialect;
  std::vector<SelectedFeature> features;
  std::string main_category;

  bool operator==(const FeatureSelection&) const = default;
};

struct SamplingConfig {
  size_t min_features = 3;
  size_t max_features = 20;
  bool diversity = true;
};

// Parses and validates a catalog document. `origin` is used in error text.
FeatureCatalog parse_catalog(const nlohmann::json& doc, const std::string& origin);

// Throws ParseError or ValidationError naming `path`.
FeatureCatalog load_catalog(const std::filesystem::path& path);

// Hierarchical path sampling: a main (category, feature) path, further
// features from the main category, then features from sibling categories.
// With diversity on, at least two categories and room for two features, one
// or more sibling-category features are always included.
FeatureSelection sample_selection(const FeatureCatalog& catalog, Rng& rng,
                                  const SamplingConfig& cfg);

// Uniform draw over the flattened feature set, ignoring the hierarchy.
FeatureSelection sample_random_flat(const FeatureCatalog& catalog, Rng& rng,
                                    const SamplingConfig& cfg);

void to_json(nlohmann::json& j, const Feature& f);
void from_json(const nlohmann::json& j, Feature& f);
void to_json(nlohmann::json& j, const FeatureSelection& s);
void from_json(const nlohmann::json& j, FeatureSelection& s);
nlohmann::json catalog_to_json(const FeatureCatalog& catalog);

}  // namespace mist

#endif  // MIST_FEATURE_CATALOG_H_
