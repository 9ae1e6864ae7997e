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

#ifndef MIST_JSON_UTIL_H_
#define MIST_JSON_UTIL_H_

#include <filesystem>
#include <string>

#include "json.hpp"

namespace mist {

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Strict JSON parse: rejects duplicate object keys. Throws ParseError naming
// `origin`.
nlohmann::json parse_json_strict(const std::string& text, const std::string& origin);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace mist

#endif  // MIST_JSON_UTIL_H_
