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

#include "mist/llm_gateway.h"

#include <cstdlib>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "mist/error.h"

namespace mist {

using nlohmann::json;

void GenerationRequest::validate() const {
  if (system_prompt.empty() || user_prompt.empty()) {
    throw ConfigError("generation request needs non-empty prompts");
  }
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw ConfigError("temperature must lie in [0, 2]");
  }
  if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");
}

MockBackend::MockBackend(MockScript script) : script_(std::move(script)) {
  if (script_.responses.empty()) throw ConfigError("mock script must hold at least one response");
}

GenerationResponse MockBackend::generate(const GenerationRequest& req) {
  req.validate();
  std::lock_guard lock(mu_);
  const size_t n = script_.responses.size();
  if (next_ >= n && script_.policy == ExhaustionPolicy::kError) {
    throw ScriptExhausted("mock script exhausted after " + std::to_string(n) + " responses");
  }
  GenerationResponse out{script_.responses[next_ % n], id(), std::chrono::milliseconds(0)};
  ++next_;
  return out;
}

size_t MockBackend::calls() const {
  std::lock_guard lock(mu_);
  return next_;
}

std::string instantiate_pattern(const std::string& pattern, Rng& rng) {
  static const char* kWords[] = {"alpha", "beta", "gamma", "delta", "a", "ab", "b", "",
                                 "mist", "Zeta", "x y", "42"};
  std::string out;
  size_t i = 0;
  while (i < pattern.size()) {
    if (pattern[i] != '{') {
      out += pattern[i++];
      continue;
    }
    const size_t close = pattern.find('}', i);
    if (close == std::string::npos) {
      throw PatternError("unclosed placeholder in pattern: " + pattern);
    }
    const std::string name = pattern.substr(i + 1, close - i - 1);
    if (name == "int") {
      out += std::to_string(rng.range(-5, 100));
    } else if (name == "real") {
      std::ostringstream os;
      os << rng.range(-50, 500) << "." << rng.range(0, 99);
      out += os.str();
    } else if (name == "text") {
      out += "'" + std::string(kWords[rng.below(std::size(kWords))]) + "'";
    } else if (name == "ident") {
      out += "x" + std::to_string(rng.below(1000000));
    } else {
      throw PatternError("unknown placeholder {" + name + "} in pattern: " + pattern);
    }
    i = close + 1;
  }
  return out;
}

GenerationResponse template_generate(const FeatureSelection& selection, Rng& rng) {
  std::ostringstream sql;
  sql << "CREATE TABLE t0 (c0 INTEGER PRIMARY KEY, c1 TEXT, c2 REAL);\n";
  sql << "CREATE TABLE t1 (c0 INTEGER, c1 TEXT, c2 REAL, c3 BLOB);\n";
  const int rows0 = static_cast<int>(rng.range(2, 5));
  for (int r = 1; r <= rows0; ++r) {
    sql << "INSERT INTO t0 (c0, c1, c2) VALUES (" << r << ", "
        << instantiate_pattern("{text}", rng) << ", " << instantiate_pattern("{real}", rng)
        << ");\n";
  }
  const int rows1 = static_cast<int>(rng.range(2, 5));
  sql << "INSERT INTO t1 (c0, c1, c2, c3) VALUES ";
  for (int r = 0; r < rows1; ++r) {
    if (r) sql << ", ";
    sql << "(" << rng.range(1, rows0 + 2) << ", " << instantiate_pattern("{text}", rng) << ", "
        << instantiate_pattern("{real}", rng) << ", X'0" << rng.below(10) << "')";
  }
  sql << ";\n";
  for (const auto& sf : selection.features) {
    sql << "-- " << sf.feature.name << "\n";
    sql << instantiate_pattern(sf.feature.syntax_pattern, rng) << "\n";
  }
  sql << "SELECT * FROM t0;\n";

  std::ostringstream text;
  text << "Here is a " << selection.dialect << " test case covering " << selection.features.size()
       << " features.\n```sql\n"
       << sql.str() << "```\n";
  return {text.str(), "template", std::chrono::milliseconds(0)};
}

TemplateBackend::TemplateBackend(std::shared_ptr<const FeatureCatalog> catalog)
    : catalog_(std::move(catalog)) {}

GenerationResponse TemplateBackend::generate(const GenerationRequest& req) {
  req.validate();
  Rng rng(req.seed);
  if (req.selection) return template_generate(*req.selection, rng);

  const std::string& prompt = req.user_prompt;
  const size_t open = prompt.find("```sql\n");
  if (open == std::string::npos) {
    throw BackendRefusal("template backend needs a feature selection or a fenced SQL block");
  }
  const size_t body = open + 7;
  const size_t close = prompt.find("```", body);
  std::string sql = prompt.substr(body, close == std::string::npos ? std::string::npos
                                                                    : close - body);
  if (catalog_ && catalog_->feature_count() > 0) {
    const auto& cat = catalog_->categories[rng.below(catalog_->categories.size())];
    const auto& feature = cat.features[rng.below(cat.features.size())];
    sql += instantiate_pattern(feature.syntax_pattern, rng) + "\n";
  }
  return {"```sql\n" + sql + "```\n", id(), std::chrono::milliseconds(0)};
}

HttpBackendConfig HttpBackendConfig::from_env() {
  HttpBackendConfig cfg;
  auto get = [](const char* name) {
    const char* v = std::getenv(name);
    return std::string(v ? v : "");
  };
  cfg.base_url = get("MIST_LLM_BASE_URL");
  cfg.api_key = get("MIST_LLM_API_KEY");
  cfg.model = get("MIST_LLM_MODEL");
  return cfg;
}

HttpBackend::HttpBackend(HttpBackendConfig cfg)
    : cfg_(std::move(cfg)), in_flight_(std::max(1, std::min(cfg_.max_in_flight, 64))) {
  if (cfg_.base_url.empty()) throw ConfigError("live backend needs MIST_LLM_BASE_URL");
  if (cfg_.model.empty()) throw ConfigError("live backend needs MIST_LLM_MODEL");
  std::string url = cfg_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  const size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("base URL lacks a scheme: " + url);
  const size_t path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  if (prefix.size() < 3 || prefix.substr(prefix.size() - 3) != "/v1") prefix += "/v1";
  path_ = prefix + "/chat/completions";
}

std::string HttpBackend::request_body(const GenerationRequest& req) const {
  json body = {
      {"model", cfg_.model},
      {"messages",
       json::array({{{"role", "system"}, {"content", req.system_prompt}},
                    {{"role", "user"}, {"content", req.user_prompt}}})},
      {"temperature", req.temperature},
      {"max_tokens", req.max_tokens},
      {"n", 1},
  };
  return body.dump();
}

std::string HttpBackend::parse_completion(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("malformed response body: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array()) {
    throw ProtocolError("response lacks a choices array");
  }
  if (doc["choices"].empty()) throw BackendRefusal("response holds no choices");
  const auto& choice = doc["choices"][0];
  if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object()) {
    throw ProtocolError("choices[0] lacks a message object");
  }
  const auto& content = choice["message"].value("content", json());
  if (content.is_null()) throw BackendRefusal("completion content is null");
  if (!content.is_string()) throw ProtocolError("completion content is not a string");
  if (choice.value("finish_reason", json()) == "content_filter") {
    throw BackendRefusal("completion blocked by content filter");
  }
  auto text = content.get<std::string>();
  if (text.empty()) throw BackendRefusal("empty completion");
  return text;
}

std::string HttpBackend::post_once(const std::string& body) {
  httplib::Client client(scheme_host_port_);
  const auto secs = static_cast<time_t>(cfg_.timeout_secs);
  const auto usecs = static_cast<time_t>((cfg_.timeout_secs - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);
  auto res = client.Post(path_, headers, body, "application/json");
  if (!res) {
    throw TransportError(scheme_host_port_ + path_ + ": " + httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    throw TransportError("server returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw ProtocolError("server returned HTTP " + std::to_string(res->status) + ": " +
                        res->body.substr(0, 200));
  }
  return res->body;
}

GenerationResponse HttpBackend::generate(const GenerationRequest& req) {
  req.validate();
  const std::string body = request_body(req);
  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<64>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  const auto start = std::chrono::steady_clock::now();
  auto backoff = cfg_.backoff;
  for (int attempt = 0;; ++attempt) {
    try {
      std::string reply = post_once(body);
      GenerationResponse out;
      out.raw_text = parse_completion(reply);
      out.backend_id = id();
      out.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start);
      return out;
    } catch (const TransportError&) {
      if (attempt >= cfg_.max_retries) throw;
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
}

}  // namespace mist
