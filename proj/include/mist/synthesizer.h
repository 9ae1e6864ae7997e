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

#ifndef MIST_SYNTHESIZER_H_
#define MIST_SYNTHESIZER_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mist/feature_catalog.h"
#include "mist/llm_gateway.h"
#include "mist/rng.h"
#include "mist/test_case.h"

namespace mist {

struct PromptBundle {
  std::string system_prompt;
  std::string user_prompt;
};

enum class ErrorKind { kSyntax, kRuntime, kCrash };

const char* to_string(ErrorKind kind);

struct ErrorEntry {
  ErrorKind kind;
  std::string normalized_message;
  uint64_t occurrence_count = 1;
  std::string example_sql;
  uint64_t last_seen = 0;  // recency stamp, larger is newer
};

// Bounded, deduplicated store of execution failures fed back into prompts.
class ErrorMemory {
 public:
  explicit ErrorMemory(size_t capacity = 64);

  size_t capacity() const { return capacity_; }
  const std::vector<ErrorEntry>& entries() const { return entries_; }

  // Top `k` entries by occurrence count, ties broken by recency.
  std::vector<ErrorEntry> top(size_t k) const;

  void record(ErrorKind kind, std::string_view message, std::string_view sql);

 private:
  size_t capacity_;
  uint64_t clock_ = 0;
  std::vector<ErrorEntry> entries_;
};

// Lowercases and masks quoted literals ('?') and digit runs ('#').
std::string normalize_error_message(std::string_view message);

// Free-function form of ErrorMemory::record; message must be non-empty.
void record_error(ErrorMemory& memory, ErrorKind kind, std::string_view message,
                  std::string_view sql);

PromptBundle build_prompt(const FeatureSelection& selection, const ErrorMemory& memory,
                          size_t k);
PromptBundle build_simple_prompt(std::string_view dialect);
PromptBundle build_mutation_prompt(std::string_view dialect, const TestCase& seed);

bool is_allowed_leading_keyword(std::string_view word);

// Post-processes a raw completion into semicolon-terminated statements.
// Throws NoSqlFound when nothing survives.
std::vector<std::string> extract_sql(std::string_view raw);

enum class SynthesisStrategy { kSimple, kRandomFeature, kHierarchical };

struct SynthesisConfig {
  SamplingConfig sampling;
  SynthesisStrategy strategy = SynthesisStrategy::kHierarchical;
  size_t max_retries = 3;
  size_t digest_k = 5;
  double temperature = 0.2;
  int max_tokens = 1024;
};

// sample -> prompt -> generate -> extract -> classify, resampling on
// extraction failure up to cfg.max_retries times. Throws SynthesisFailure.
TestCase synthesize_one(const FeatureCatalog& catalog, const ErrorMemory& memory,
                        Backend& backend, Rng& rng, const SynthesisConfig& cfg,
                        std::string id);

}  // namespace mist

#endif  // MIST_SYNTHESIZER_H_
