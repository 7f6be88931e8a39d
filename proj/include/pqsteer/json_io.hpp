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

// Shared JSON format. Complex scalars are [re, im]; matrices are arrays of
// rows. Every document carries "type" and a "scenario" block; members are
// keyed "a|x" (traditional, instrumental), "a|x,y" (Bob with input) or
// "a1,a2|x1,x2" (sequential); functional coefficients are keyed "a,x,y" or
// "a,x".

#include <cstddef>
#include <string>
#include <variant>

#include "json.hpp"
#include "pqsteer/assemblage.hpp"
#include "pqsteer/error.hpp"
#include "pqsteer/ghjw.hpp"
#include "pqsteer/steering.hpp"

namespace pqsteer {

using Json = nlohmann::ordered_json;

/// Malformed text (offset set) or a schema violation (path set).
class JsonInputError : public InvalidInputError {
 public:
  JsonInputError(const std::string& what, std::size_t offset, std::string path)
      : InvalidInputError(what), offset_(offset), path_(std::move(path)) {}
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t offset() const { return offset_; }
  const std::string& path() const { return path_; }

 private:
  std::size_t offset_;
  std::string path_;
};

Json parse_json_text(const std::string& text);
Json read_json_file(const std::string& path);

Json to_json(Complex z);
Json to_json(const CMatrix& m);
Json to_json(const CVector& v);
Json to_json(const ScenarioShape& s);
Json to_json(const SequentialShape& s);
Json to_json(const BwiAssemblage& s);
Json to_json(const SequentialAssemblage& s);
Json to_json(const InstrumentalAssemblage& s);
Json to_json(const SteeringFunctional& f);
Json to_json(const InstrumentalFunctional& f);
Json to_json(const TraditionalRealization& r);
Json to_json(const SequentialRealization& r);

// `path` is the JSON pointer of `j`, used in diagnostics.
Complex complex_from_json(const Json& j, const std::string& path = "");
CMatrix matrix_from_json(const Json& j, const std::string& path = "");
CVector vector_from_json(const Json& j, const std::string& path = "");
ScenarioShape shape_from_json(const Json& j, const std::string& path = "/scenario");
SequentialShape sequential_shape_from_json(const Json& j, const std::string& path = "/scenario");
BwiAssemblage bwi_from_json(const Json& j);
SequentialAssemblage sequential_from_json(const Json& j);
InstrumentalAssemblage instrumental_from_json(const Json& j);
SteeringFunctional functional_from_json(const Json& j);
InstrumentalFunctional instrumental_functional_from_json(const Json& j);
TraditionalRealization traditional_realization_from_json(const Json& j);
SequentialRealization sequential_realization_from_json(const Json& j);

using AnyAssemblage = std::variant<BwiAssemblage, SequentialAssemblage, InstrumentalAssemblage>;
using AnyFunctional = std::variant<SteeringFunctional, InstrumentalFunctional>;

/// Dispatches on scenario.kind.
AnyAssemblage assemblage_from_json(const Json& j);
AnyFunctional any_functional_from_json(const Json& j);

}  // namespace pqsteer
