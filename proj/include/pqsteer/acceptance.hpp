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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pqsteer {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double value = 0.0;    // headline number, NaN when there is none
  std::string detail;    // measured values and targets
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 20190801;
  /// Restrict to these criterion ids; empty runs all.
  std::vector<int> only;
};

/// Runs every reproduction criterion; failures are rows, never exceptions.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts = {});

/// "[PASS]  3  name: detail (0.12 s)"
std::string format_row(const CriterionResult& r);

}  // namespace pqsteer
