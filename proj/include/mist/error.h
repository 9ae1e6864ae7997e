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

#ifndef MIST_ERROR_H_
#define MIST_ERROR_H_

#include <stdexcept>
#include <string>

namespace mist {

// Root of every error raised by the library. `kind()` is a stable short tag
// used by the CLI to map failures to exit codes and by tests.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

#define MIST_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

// feature catalog
MIST_DEFINE_ERROR(ParseError);
MIST_DEFINE_ERROR(ValidationError);
MIST_DEFINE_ERROR(EmptyCatalog);

// llm gateway
MIST_DEFINE_ERROR(TransportError);
MIST_DEFINE_ERROR(ProtocolError);
MIST_DEFINE_ERROR(BackendRefusal);
MIST_DEFINE_ERROR(ScriptExhausted);
MIST_DEFINE_ERROR(PatternError);

// synthesizer / sql model
MIST_DEFINE_ERROR(NoSqlFound);
MIST_DEFINE_ERROR(SynthesisFailure);
MIST_DEFINE_ERROR(EmptyStatement);
MIST_DEFINE_ERROR(UnterminatedLiteral);

// mutation rules
MIST_DEFINE_ERROR(NotApplicable);
MIST_DEFINE_ERROR(UnknownDialect);
MIST_DEFINE_ERROR(UnknownRule);

// search
MIST_DEFINE_ERROR(SearchExhausted);
MIST_DEFINE_ERROR(NoUntriedAction);
MIST_DEFINE_ERROR(EmptySeedPool);

// harness / coverage / campaign
MIST_DEFINE_ERROR(DriverUnavailable);
MIST_DEFINE_ERROR(UniverseMismatch);
MIST_DEFINE_ERROR(ConfigError);

#undef MIST_DEFINE_ERROR

}  // namespace mist

#endif  // MIST_ERROR_H_
