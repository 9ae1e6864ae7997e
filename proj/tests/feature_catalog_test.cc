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

#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "mist/error.h"

namespace mist {
namespace {

using nlohmann::json;

json catalog_doc(const std::vector<std::pair<std::string, int>>& shape) {
  json cats = json::array();
  for (const auto& [name, n] : shape) {
    json feats = json::array();
    for (int i = 0; i < n; ++i) {
      feats.push_back({{"name", name + "_f" + std::to_string(i)},
                       {"description", "feature " + std::to_string(i)},
                       {"syntax_pattern", "SELECT " + std::to_string(i) + ";"}});
    }
    cats.push_back({{"name", name}, {"features", feats}});
  }
  return {{"dialect", "sqlite"}, {"categories", cats}};
}

std::string category_of(const FeatureCatalog& c, const std::string& feature) {
  for (const auto& cat : c.categories) {
    for (const auto& f : cat.features) {
      if (f.name == feature) return cat.name;
    }
  }
  return "";
}

TEST(Catalog, MinimalCatalog) {
  const json doc = {{"dialect", "sqlite"},
                    {"categories",
                     {{{"name", "Basic"},
                       {"features",
                        {{{"name", "SELECT literal"},
                          {"description", "a constant query"},
                          {"syntax_pattern", "SELECT 1;"}}}}}}}};
  const auto c = parse_catalog(doc, "mini.json");
  ASSERT_EQ(c.categories.size(), 1u);
  EXPECT_EQ(c.feature_count(), 1u);
}

TEST(Catalog, ShippedSqliteCatalogCountsEveryEntry) {
  const auto path = std::string(MIST_DATA_DIR) + "/sqlite_catalog.json";
  const auto c = load_catalog(path);
  const auto raw = json::parse(std::ifstream(path));
  size_t entries = 0;
  for (const auto& cat : raw["categories"]) entries += cat["features"].size();
  EXPECT_EQ(c.feature_count(), entries);
  EXPECT_EQ(entries, 62u);
  EXPECT_EQ(c.dialect, "sqlite");
}

TEST(Catalog, DuplicateCategoryRejected) {
  auto doc = catalog_doc({{"Joins", 1}, {"Joins", 2}});
  EXPECT_THROW(parse_catalog(doc, "dup.json"), ValidationError);
}

TEST(Catalog, DuplicateFeatureRejected) {
  auto doc = catalog_doc({{"Joins", 2}});
  doc["categories"][0]["features"][1]["name"] = "Joins_f0";
  EXPECT_THROW(parse_catalog(doc, "dup.json"), ValidationError);
}

TEST(Catalog, EmptyCategoryRejected) {
  EXPECT_THROW(parse_catalog(catalog_doc({{"A", 1}, {"B", 0}}), "e.json"), ValidationError);
}

TEST(Catalog, MalformedFileIsParseErrorNamingPath) {
  const auto dir = std::filesystem::temp_directory_path() / "mist_catalog_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "broken.json";
  std::ofstream(path) << "{\"dialect\": \"sqlite\", ";
  try {
    load_catalog(path);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("broken.json"), std::string::npos);
  }
}

TEST(Sampling, ForcedByCounts) {
  const auto c = parse_catalog(catalog_doc({{"A", 2}, {"B", 1}}), "x");
  Rng rng(1);
  const auto s = sample_selection(c, rng, {3, 3, true});
  EXPECT_EQ(s.features.size(), 3u);
  std::set<std::string> names;
  for (const auto& f : s.features) names.insert(f.feature.name);
  EXPECT_EQ(names.size(), 3u);
}

TEST(Sampling, MainPathComesFirst) {
  const auto c = parse_catalog(catalog_doc({{"String Operations", 4}, {"Joins", 4}}), "x");
  for (uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto s = sample_selection(c, rng, {3, 5, true});
    EXPECT_EQ(s.features.front().category, s.main_category);
    EXPECT_EQ(category_of(c, s.features.front().feature.name), s.main_category);
  }
}

TEST(Sampling, Deterministic) {
  const auto c = load_catalog(std::string(MIST_DATA_DIR) + "/sqlite_catalog.json");
  Rng a(99), b(99);
  const auto x = sample_selection(c, a, {});
  const auto y = sample_selection(c, b, {});
  EXPECT_EQ(x, y);
  EXPECT_EQ(json(x).dump(), json(y).dump());
}

TEST(Sampling, PropertyOverRandomCatalogs) {
  Rng meta(2024);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::pair<std::string, int>> shape;
    const int ncat = static_cast<int>(meta.range(1, 6));
    for (int k = 0; k < ncat; ++k) shape.push_back({"C" + std::to_string(k), static_cast<int>(meta.range(1, 8))});
    const auto c = parse_catalog(catalog_doc(shape), "random");
    const size_t lo = static_cast<size_t>(meta.range(1, 5));
    const size_t hi = lo + static_cast<size_t>(meta.range(0, 10));
    const bool diversity = meta.chance(0.5);
    Rng rng(meta.next());
    const auto s = sample_selection(c, rng, {lo, hi, diversity});
    const size_t total = c.feature_count();
    EXPECT_GE(s.features.size(), std::min(lo, total));
    EXPECT_LE(s.features.size(), std::min(hi, total));
    std::set<std::string> names;
    bool cross = false;
    for (const auto& f : s.features) {
      names.insert(f.feature.name);
      EXPECT_EQ(category_of(c, f.feature.name), f.category);
      cross |= f.category != s.main_category;
    }
    EXPECT_EQ(names.size(), s.features.size());
    if (diversity && c.categories.size() >= 2 && hi >= 2) {
      EXPECT_TRUE(cross);
    }
  }
}

TEST(Sampling, DiversityOffAllowsSingleCategory) {
  const auto c = parse_catalog(catalog_doc({{"A", 10}, {"B", 10}}), "x");
  int single = 0;
  for (uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    const auto s = sample_selection(c, rng, {3, 5, false});
    bool cross = false;
    for (const auto& f : s.features) cross |= f.category != s.main_category;
    single += !cross;
  }
  EXPECT_GT(single, 0);
}

TEST(Sampling, EmptyCatalog) {
  FeatureCatalog empty;
  Rng rng(0);
  EXPECT_THROW(sample_selection(empty, rng, {}), EmptyCatalog);
  EXPECT_THROW(sample_random_flat(empty, rng, {}), EmptyCatalog);
}

TEST(RandomFlat, SingleFeatureClipsToOne) {
  const auto c = parse_catalog(catalog_doc({{"A", 1}}), "x");
  Rng rng(3);
  const auto s = sample_random_flat(c, rng, {3, 20, true});
  ASSERT_EQ(s.features.size(), 1u);
  EXPECT_EQ(s.main_category, "A");
}

TEST(RandomFlat, Deterministic) {
  const auto c = load_catalog(std::string(MIST_DATA_DIR) + "/sqlite_catalog.json");
  Rng a(5), b(5);
  EXPECT_EQ(sample_random_flat(c, a, {}), sample_random_flat(c, b, {}));
}

}  // namespace
}  // namespace mist
