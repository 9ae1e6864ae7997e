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

#ifndef MIST_LLM_GATEWAY_H_
#define MIST_LLM_GATEWAY_H_

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "mist/feature_catalog.h"
#include "mist/rng.h"

namespace mist {

struct GenerationRequest {
  std::string system_prompt;
  std::string user_prompt;
  double temperature = 0.2;
  int max_tokens = 1024;
  // Not sent over the wire. Offline backends use these to stay deterministic.
  std::optional<FeatureSelection> selection;
  uint64_t seed = 0;

  // Throws ConfigError when prompts are empty or parameters are out of range.
  void validate() const;
};

struct GenerationResponse {
  std::string raw_text;
  std::string backend_id;
  std::chrono::milliseconds latency{0};
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual GenerationResponse generate(const GenerationRequest& req) = 0;
  virtual std::string id() const = 0;
  // False when the output depends on call order (scripted replies), so
  // callers that need reproducibility must issue requests serially.
  virtual bool order_independent() const { return true; }
};

enum class ExhaustionPolicy { kCycle, kError };

struct MockScript {
  std::vector<std::string> responses;
  ExhaustionPolicy policy = ExhaustionPolicy::kCycle;
};

// Replays canned completions in order.
class MockBackend : public Backend {
 public:
  explicit MockBackend(MockScript script);
  GenerationResponse generate(const GenerationRequest& req) override;
  std::string id() const override { return "mock"; }
  bool order_independent() const override { return false; }
  size_t calls() const;

 private:
  MockScript script_;
  mutable std::mutex mu_;
  size_t next_ = 0;
};

// Assembles a CREATE/INSERT/SELECT test case from each selected feature's
// syntax pattern. Placeholders {int} {real} {text} {ident} are instantiated
// from `rng`; any other {name} raises PatternError.
GenerationResponse template_generate(const FeatureSelection& selection, Rng& rng);

std::string instantiate_pattern(const std::string& pattern, Rng& rng);

// Offline stand-in for a model. Requests carrying a selection are answered by
// template_generate; other requests (mutation prompts) echo the first fenced
// SQL block of the user prompt with one extra catalog pattern appended.
class TemplateBackend : public Backend {
 public:
  explicit TemplateBackend(std::shared_ptr<const FeatureCatalog> catalog = nullptr);
  GenerationResponse generate(const GenerationRequest& req) override;
  std::string id() const override { return "template"; }

 private:
  std::shared_ptr<const FeatureCatalog> catalog_;
};

struct HttpBackendConfig {
  std::string base_url;
  std::string api_key;
  std::string model;
  double timeout_secs = 120;
  int max_retries = 2;
  std::chrono::milliseconds backoff{500};
  int max_in_flight = 3;

  // Reads MIST_LLM_BASE_URL, MIST_LLM_API_KEY and MIST_LLM_MODEL.
  static HttpBackendConfig from_env();
};

// OpenAI-compatible chat-completions client.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig cfg);
  GenerationResponse generate(const GenerationRequest& req) override;
  std::string id() const override { return "live:" + cfg_.model; }

  // Request body for `req`; exposed for tests.
  std::string request_body(const GenerationRequest& req) const;
  // Extracts choices[0].message.content. Throws ProtocolError or
  // BackendRefusal.
  static std::string parse_completion(const std::string& body);

 private:
  std::string post_once(const std::string& body);

  HttpBackendConfig cfg_;
  std::string scheme_host_port_;
  std::string path_;
  std::counting_semaphore<64> in_flight_;
};

}  // namespace mist

#endif  // MIST_LLM_GATEWAY_H_
