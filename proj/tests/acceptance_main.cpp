// Copyright 2026 The pqsteer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Prints one pass/fail line per reproduction criterion; exits 1 if any fails.

#include <cstdio>
#include <cstdlib>
#include <string>

#include "pqsteer/acceptance.hpp"

int main(int argc, char** argv) {
  pqsteer::AcceptanceOptions opts;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--seed" && i + 1 < argc) {
      opts.seed = std::strtoull(argv[++i], nullptr, 10);
    } else {
      opts.only.push_back(std::atoi(argv[i]));
    }
  }
  int failed = 0;
  for (const auto& r : pqsteer::run_acceptance(opts)) {
    std::printf("%s\n", pqsteer::format_row(r).c_str());
    std::fflush(stdout);
    if (!r.passed) ++failed;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
