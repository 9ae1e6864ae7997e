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

// Stand-in for a DBMS command-line client, used by the external driver
// tests. Reads one statement per line from stdin and reacts to marker words:
//   mist_syntax   -> "Error: near line N: syntax error"
//   mist_runtime  -> "Error: near line N: constraint failed"
//   mist_abort    -> abort()
//   mist_exit7    -> exit(7)
//   mist_sleep    -> sleeps for a minute
// Anything else prints "ok".

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

int main() {
  std::string line;
  int n = 0;
  while (std::getline(std::cin, line)) {
    ++n;
    if (line.find("mist_syntax") != std::string::npos) {
      std::cout << "Error: near line " << n << ": syntax error" << std::endl;
    } else if (line.find("mist_runtime") != std::string::npos) {
      std::cout << "Error: near line " << n << ": constraint failed" << std::endl;
    } else if (line.find("mist_abort") != std::string::npos) {
      std::cout.flush();
      std::abort();
    } else if (line.find("mist_exit7") != std::string::npos) {
      std::cout.flush();
      std::exit(7);
    } else if (line.find("mist_sleep") != std::string::npos) {
      std::this_thread::sleep_for(std::chrono::seconds(60));
    } else {
      std::cout << "ok" << std::endl;
    }
  }
  return 0;
}
