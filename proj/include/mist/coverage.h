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

#ifndef MIST_COVERAGE_H_
#define MIST_COVERAGE_H_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "mist/test_case.h"

namespace mist {

struct BranchId {
  int line = 0;
  std::string block;
  std::string branch;

  auto operator<=>(const BranchId&) const = default;
};

struct FunctionRecord {
  int line = 0;
  bool covered = false;

  bool operator==(const FunctionRecord&) const = default;
};

// Instrumented items of one source file and whether each was hit.
struct FileCoverage {
  std::map<int, bool> lines;
  std::map<std::string, FunctionRecord> functions;
  std::map<BranchId, bool> branches;

  bool operator==(const FileCoverage&) const = default;
};

struct Counts {
  uint64_t covered = 0;
  uint64_t instrumented = 0;

  double rate() const {
    return instrumented ? static_cast<double>(covered) / static_cast<double>(instrumented) : 0.0;
  }
  Counts& operator+=(const Counts& o) {
    covered += o.covered;
    instrumented += o.instrumented;
    return *this;
  }
  bool operator==(const Counts&) const = default;
};

struct Rates {
  double line = 0;
  double function = 0;
  double branch = 0;

  bool operator==(const Rates&) const = default;
};

// Covered and instrumented lines, functions and branches keyed by source
// file. Values are immutable in practice: merge() builds a new snapshot.
struct CoverageSnapshot {
  std::map<std::string, FileCoverage> files;

  Counts lines() const;
  Counts functions() const;
  Counts branches() const;
  Rates rates() const;
  // (file, branch) pairs that were hit.
  std::set<std::pair<std::string, BranchId>> covered_branches() const;

  bool operator==(const CoverageSnapshot&) const = default;
};

// lcov tracefile reader. Throws ParseError naming the 1-based line.
CoverageSnapshot parse_lcov_text(std::string_view text, const std::string& origin = "<lcov>");
CoverageSnapshot parse_lcov(const std::filesystem::path& path);
// Canonical tracefile for a snapshot; parse_lcov_text inverts it exactly.
std::string render_lcov(const CoverageSnapshot& snapshot);

// Per-dimension union. Throws UniverseMismatch when a file present in both
// inputs has different instrumented items.
CoverageSnapshot merge(const CoverageSnapshot& a, const CoverageSnapshot& b);

// |run.branches \ cumulative.branches|
uint64_t diff_new_branches(const CoverageSnapshot& cumulative, const CoverageSnapshot& run);

// Ordered module -> glob list. Globs match source paths ("*" stays within a
// path segment, "**" crosses segments); a "fn:" prefix matches the enclosing
// function name instead, for single-file sources such as an amalgamation.
struct ModuleMap {
  struct Entry {
    std::string module;
    std::vector<std::string> globs;
  };
  std::vector<Entry> entries;

  static ModuleMap from_json(const nlohmann::json& j);
  static ModuleMap load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

bool glob_match(std::string_view pattern, std::string_view text);

inline const std::vector<std::string>& standard_modules() {
  static const std::vector<std::string> kModules = {"Parser", "Optimizer", "Executor", "Storage",
                                                    "Other"};
  return kModules;
}

struct ModuleCounts {
  std::string module;
  Counts lines;
  Counts functions;
  Counts branches;
};

// One row per standard module, in standard order. Unmatched items go to Other.
std::vector<ModuleCounts> module_rates(const CoverageSnapshot& snapshot, const ModuleMap& map);

// Fires when a full window of per-case gains sums below the threshold.
class PlateauDetector {
 public:
  PlateauDetector(size_t window, uint64_t threshold);
  bool push(uint64_t gain);
  size_t window() const { return window_; }

 private:
  size_t window_;
  uint64_t threshold_;
  std::deque<uint64_t> gains_;
};

bool plateau(PlateauDetector& detector, uint64_t gain);

struct SyntheticCombo {
  std::vector<std::string> features;
  std::vector<size_t> branches;
};

struct SyntheticOracleConfig {
  size_t universe = 2000;
  uint64_t seed = 0;
  // Branches lit by features absent from `mapping`; 0 disables the fallback.
  size_t default_fanout = 3;
  std::map<std::string, std::vector<size_t>> mapping;
  std::vector<SyntheticCombo> combos;

  static SyntheticOracleConfig from_json(const nlohmann::json& j);
};

// Deterministic stand-in for an instrumented engine: a case's features
// (keywords, called functions, operators, statement kinds, and the
// provenance markers "seed:<id>" and "rule:<id>") light fixed branch subsets
// of a universe spread over four module files.
class SyntheticOracle {
 public:
  explicit SyntheticOracle(SyntheticOracleConfig cfg);

  CoverageSnapshot evaluate(const TestCase& tc) const;
  std::set<size_t> branches_for(const std::set<std::string>& features) const;
  const SyntheticOracleConfig& config() const { return cfg_; }
  // Module map matching the oracle's synthetic source files.
  static ModuleMap module_map();

 private:
  CoverageSnapshot snapshot_of(const std::set<size_t>& hit) const;

  SyntheticOracleConfig cfg_;
};

std::set<std::string> case_features(const TestCase& tc);

inline CoverageSnapshot synthetic_evaluate(const SyntheticOracle& oracle, const TestCase& tc) {
  return oracle.evaluate(tc);
}

uint64_t stable_hash(std::string_view text, uint64_t seed = 0);

}  // namespace mist

#endif  // MIST_COVERAGE_H_
