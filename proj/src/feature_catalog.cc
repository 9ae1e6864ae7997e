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

#include "mist/feature_catalog.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "mist/error.h"
#include "mist/json_util.h"

namespace mist {

using nlohmann::json;

size_t FeatureCatalog::feature_count() const {
  size_t n = 0;
  for (const auto& c : categories) n += c.features.size();
  return n;
}

namespace {

const json& require(const json& obj, const char* key, json::value_t type,
                    const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ValidationError(where + ": missing field '" + key + "'");
  }
  if (it->type() != type) {
    throw ValidationError(where + ": field '" + key + "' has wrong type");
  }
  return *it;
}

}  // namespace

FeatureCatalog parse_catalog(const json& doc, const std::string& origin) {
  if (!doc.is_object()) throw ValidationError(origin + ": catalog must be an object");
  FeatureCatalog catalog;
  catalog.dialect = require(doc, "dialect", json::value_t::string, origin).get<std::string>();
  if (catalog.dialect.empty()) throw ValidationError(origin + ": empty dialect");
  const auto& cats = require(doc, "categories", json::value_t::array, origin);
  if (cats.empty()) throw ValidationError(origin + ": catalog has no categories");

  std::set<std::string> category_names;
  for (size_t ci = 0; ci < cats.size(); ++ci) {
    const std::string where = origin + ": categories[" + std::to_string(ci) + "]";
    if (!cats[ci].is_object()) throw ValidationError(where + " must be an object");
    FeatureCategory category;
    category.name = require(cats[ci], "name", json::value_t::string, where).get<std::string>();
    if (category.name.empty()) throw ValidationError(where + ": empty category name");
    if (!category_names.insert(category.name).second) {
      throw ValidationError(where + ": duplicate category '" + category.name + "'");
    }
    const auto& feats = require(cats[ci], "features", json::value_t::array, where);
    if (feats.empty()) {
      throw ValidationError(where + ": category '" + category.name + "' has no features");
    }
    std::set<std::string> feature_names;
    for (size_t fi = 0; fi < feats.size(); ++fi) {
      const std::string fwhere = where + ".features[" + std::to_string(fi) + "]";
      if (!feats[fi].is_object()) throw ValidationError(fwhere + " must be an object");
      Feature f;
      f.name = require(feats[fi], "name", json::value_t::string, fwhere).get<std::string>();
      f.description =
          require(feats[fi], "description", json::value_t::string, fwhere).get<std::string>();
      f.syntax_pattern =
          require(feats[fi], "syntax_pattern", json::value_t::string, fwhere).get<std::string>();
      if (f.name.empty()) throw ValidationError(fwhere + ": empty feature name");
      if (f.syntax_pattern.empty()) {
        throw ValidationError(fwhere + ": empty syntax_pattern for '" + f.name + "'");
      }
      if (!feature_names.insert(f.name).second) {
        throw ValidationError(fwhere + ": duplicate feature '" + f.name + "' in category '" +
                              category.name + "'");
      }
      category.features.push_back(std::move(f));
    }
    catalog.categories.push_back(std::move(category));
  }
  return catalog;
}

FeatureCatalog load_catalog(const std::filesystem::path& path) {
  return parse_catalog(read_json_file(path), path.string());
}

namespace {

struct FlatRef {
  size_t category;
  size_t feature;
};

size_t draw_target_size(const SamplingConfig& cfg, size_t available, Rng& rng) {
  size_t lo = std::min(cfg.min_features, available);
  size_t hi = std::min(cfg.max_features, available);
  lo = std::max<size_t>(lo, 1);
  hi = std::max(hi, lo);
  return static_cast<size_t>(rng.range(static_cast<int64_t>(lo), static_cast<int64_t>(hi)));
}

void check_sampling(const FeatureCatalog& catalog, const SamplingConfig& cfg) {
  if (catalog.feature_count() == 0) throw EmptyCatalog("catalog has no features");
  if (cfg.min_features < 1 || cfg.max_features < cfg.min_features) {
    throw ValidationError("invalid sampling bounds");
  }
}

SelectedFeature selected(const FeatureCatalog& catalog, FlatRef ref) {
  const auto& cat = catalog.categories[ref.category];
  return {cat.name, cat.features[ref.feature]};
}

}  // namespace

FeatureSelection sample_selection(const FeatureCatalog& catalog, Rng& rng,
                                  const SamplingConfig& cfg) {
  check_sampling(catalog, cfg);
  const size_t total = catalog.feature_count();

  const size_t main_cat = rng.below(catalog.categories.size());
  const auto& main = catalog.categories[main_cat];
  const size_t main_feature = rng.below(main.features.size());

  // One feature cannot span two categories; the size bound wins.
  const bool cross_possible = catalog.categories.size() >= 2 && cfg.max_features >= 2;
  size_t target = draw_target_size(cfg, total, rng);
  if (cfg.diversity && cross_possible) target = std::max<size_t>(target, 2);

  const size_t same_avail = main.features.size() - 1;
  const size_t cross_avail = total - main.features.size();
  const size_t extras = target - 1;

  // Split the extras between the main category and its siblings.
  size_t cross = 0;
  if (cfg.diversity && cross_possible) {
    const size_t lo = std::max<size_t>(1, extras > same_avail ? extras - same_avail : 0);
    const size_t hi = std::min(extras, cross_avail);
    cross = static_cast<size_t>(rng.range(static_cast<int64_t>(lo), static_cast<int64_t>(hi)));
  } else {
    cross = extras > same_avail ? extras - same_avail : 0;
  }
  const size_t same = extras - cross;

  FeatureSelection out;
  out.dialect = catalog.dialect;
  out.main_category = main.name;
  out.features.push_back(selected(catalog, {main_cat, main_feature}));

  std::vector<FlatRef> same_pool;
  for (size_t f = 0; f < main.features.size(); ++f) {
    if (f != main_feature) same_pool.push_back({main_cat, f});
  }
  rng.shuffle(std::span<FlatRef>(same_pool));
  for (size_t i = 0; i < same; ++i) out.features.push_back(selected(catalog, same_pool[i]));

  std::vector<FlatRef> cross_pool;
  for (size_t c = 0; c < catalog.categories.size(); ++c) {
    if (c == main_cat) continue;
    for (size_t f = 0; f < catalog.categories[c].features.size(); ++f) {
      cross_pool.push_back({c, f});
    }
  }
  rng.shuffle(std::span<FlatRef>(cross_pool));
  for (size_t i = 0; i < cross; ++i) out.features.push_back(selected(catalog, cross_pool[i]));
  return out;
}

FeatureSelection sample_random_flat(const FeatureCatalog& catalog, Rng& rng,
                                    const SamplingConfig& cfg) {
  check_sampling(catalog, cfg);
  std::vector<FlatRef> pool;
  for (size_t c = 0; c < catalog.categories.size(); ++c) {
    for (size_t f = 0; f < catalog.categories[c].features.size(); ++f) pool.push_back({c, f});
  }
  const size_t target = draw_target_size(cfg, pool.size(), rng);
  rng.shuffle(std::span<FlatRef>(pool));

  FeatureSelection out;
  out.dialect = catalog.dialect;
  for (size_t i = 0; i < target; ++i) out.features.push_back(selected(catalog, pool[i]));
  out.main_category = out.features.front().category;
  return out;
}

void to_json(json& j, const Feature& f) {
  j = json{{"name", f.name}, {"description", f.description}, {"syntax_pattern", f.syntax_pattern}};
}

void from_json(const json& j, Feature& f) {
  j.at("name").get_to(f.name);
  j.at("description").get_to(f.description);
  j.at("syntax_pattern").get_to(f.syntax_pattern);
}

void to_json(json& j, const FeatureSelection& s) {
  json feats = json::array();
  for (const auto& sf : s.features) {
    json entry = sf.feature;
    entry["category"] = sf.category;
    feats.push_back(std::move(entry));
  }
  j = json{{"dialect", s.dialect}, {"main_category", s.main_category}, {"features", feats}};
}

void from_json(const json& j, FeatureSelection& s) {
  j.at("dialect").get_to(s.dialect);
  j.at("main_category").get_to(s.main_category);
  s.features.clear();
  for (const auto& entry : j.at("features")) {
    SelectedFeature sf;
    entry.at("category").get_to(sf.category);
    sf.feature = entry.get<Feature>();
    s.features.push_back(std::move(sf));
  }
}

json catalog_to_json(const FeatureCatalog& catalog) {
  json cats = json::array();
  for (const auto& c : catalog.categories) {
    cats.push_back({{"name", c.name}, {"features", c.features}});
  }
  return {{"dialect", catalog.dialect}, {"categories", cats}};
}

}  // namespace mist
