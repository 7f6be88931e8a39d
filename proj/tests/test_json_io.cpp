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

#include <cstring>

#include "doctest.h"
#include "pqsteer/json_io.hpp"

using namespace pqsteer;

namespace {

bool bitwise_equal(const CMatrix& a, const CMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(Complex) * a.size()) == 0;
}

bool bitwise_equal(const std::vector<CMatrix>& a, const std::vector<CMatrix>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (!bitwise_equal(a[k], b[k])) return false;
  return true;
}

// Text round trip through dump() and parse().
Json cycle(const Json& j) { return parse_json_text(j.dump()); }

}  // namespace

TEST_CASE("complex and matrix encoding") {
  CHECK(to_json(Complex(1.5, -2.0)).dump() == "[1.5,-2.0]");
  CMatrix m(2, 2);
  m << Complex(0.25, 0), Complex(0, 0.1), Complex(0, -0.1), Complex(1.0 / 3.0, 0);
  const Json j = to_json(m);
  CHECK(j[0][1].dump() == "[0.0,0.1]");
  CHECK(bitwise_equal(matrix_from_json(cycle(j)), m));
  CHECK_THROWS_AS(to_json(Complex(std::nan(""), 0)), InvalidInputError);
}

TEST_CASE("assemblage round trips are bitwise") {
  const BwiAssemblage q = random_quantum_bwi({2, 3, 2, 2, ScenarioKind::BobWithInput}, 8);
  const Json jq = to_json(q);
  CHECK(jq["members"].contains("1|2,1"));
  CHECK(jq["scenario"]["kind"] == "bwi");
  const BwiAssemblage q2 = bwi_from_json(cycle(jq));
  CHECK(q2.shape() == q.shape());
  CHECK(bitwise_equal(q2.members(), q.members()));

  const BwiAssemblage t = random_ns_traditional(3, 2, random_density_matrix(2, 1), 4);
  const Json jt = to_json(t);
  CHECK(jt["members"].contains("2|1"));
  CHECK(bitwise_equal(std::get<BwiAssemblage>(assemblage_from_json(cycle(jt))).members(), t.members()));

  const SequentialAssemblage s = random_quantum_sequential({2, 2, 2, 2, 2}, 6);
  const Json js = to_json(s);
  CHECK(js["members"].contains("1,0|0,1"));
  const auto s2 = std::get<SequentialAssemblage>(assemblage_from_json(cycle(js)));
  CHECK(s2.shape() == s.shape());
  CHECK(bitwise_equal(s2.members(), s.members()));
  // Key order is the index layout: a1,a2|x1,x2 with x1 slowest.
  CHECK(bitwise_equal(matrix_from_json(js["members"]["1,0|0,1"]), s.at(1, 0, 0, 1)));

  const InstrumentalAssemblage in = instrumental_from_bwi(pauli_transpose_assemblage());
  const auto in2 = std::get<InstrumentalAssemblage>(assemblage_from_json(cycle(to_json(in))));
  CHECK(bitwise_equal(in2.members(), in.members()));
  CHECK(bitwise_equal(matrix_from_json(to_json(in)["members"]["1|2"]), in.at(1, 2)));
}

TEST_CASE("functional and realization round trips") {
  const SteeringFunctional f = random_psd_functional({2, 3, 2, 2, ScenarioKind::BobWithInput}, 2);
  const Json jf = to_json(f);
  CHECK(jf["coefficients"].contains("1,2,1"));
  CHECK(bitwise_equal(matrix_from_json(jf["coefficients"]["1,2,1"]), f.at(1, 2, 1)));
  CHECK(bitwise_equal(std::get<SteeringFunctional>(any_functional_from_json(cycle(jf))).coeffs(), f.coeffs()));

  const InstrumentalFunctional g = post_select(canonical_functional());
  const Json jg = to_json(g);
  CHECK(jg["coefficients"].contains("1,2"));
  CHECK(bitwise_equal(std::get<InstrumentalFunctional>(any_functional_from_json(cycle(jg))).coeffs(), g.coeffs()));

  const TraditionalRealization r = ghjw_traditional(random_ns_traditional(2, 3, random_density_matrix(2, 3), 5));
  const TraditionalRealization r2 = traditional_realization_from_json(cycle(to_json(r)));
  CHECK(r2.shape == r.shape);
  CHECK(r2.support_rank == r.support_rank);
  CHECK(bitwise_equal(CMatrix(r2.state), CMatrix(r.state)));
  CHECK(bitwise_equal(r2.povms, r.povms));

  const SequentialRealization sr = ghjw_sequential(random_ns_sequential({2, 2, 2, 2, 2}, 9));
  const SequentialRealization sr2 = sequential_realization_from_json(cycle(to_json(sr)));
  CHECK(bitwise_equal(sr2.kraus, sr.kraus));
  CHECK(bitwise_equal(sr2.second, sr.second));
  CHECK(bitwise_equal(matrix_from_json(to_json(sr)["second"]["1,0|1,0"]), sr.second_povm(1, 1, 0, 0)));
}

TEST_CASE("parse errors report the byte offset") {
  const std::string text = to_json(pr_box_assemblage()).dump();
  const std::string cut = text.substr(0, 40);
  try {
    parse_json_text(cut);
    FAIL("expected a parse error");
  } catch (const JsonInputError& e) {
    CHECK(e.offset() == cut.size() + 1);
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
  try {
    parse_json_text("{\"a\": [1, 2,, 3]}");
    FAIL("expected a parse error");
  } catch (const JsonInputError& e) {
    CHECK(e.offset() == 13);
  }
  CHECK_THROWS_AS(read_json_file("/nonexistent/x.json"), InvalidInputError);
}

TEST_CASE("schema errors report the field path") {
  auto path_of = [](const Json& j) {
    try {
      assemblage_from_json(j);
    } catch (const JsonInputError& e) {
      return e.path();
    }
    return std::string("<none>");
  };
  const Json good = to_json(pr_box_assemblage());
  CHECK(path_of(good) == "<none>");

  Json j = good;
  j["members"]["0|1,1"][1][0] = Json::array({1.0});
  CHECK(path_of(j) == "/members/0|1,1/1/0");
  j = good;
  j["members"].erase("1|0,0");
  CHECK(path_of(j) == "/members");
  j = good;
  j["members"]["1|0,0"] = Json::array();
  CHECK(path_of(j) == "/members/1|0,0");
  j = good;
  j["scenario"].erase("d");
  CHECK(path_of(j) == "/scenario/d");
  j = good;
  j["scenario"]["kind"] = "tripartite";
  CHECK(path_of(j) == "/scenario/kind");
  j = good;
  j["type"] = "functional";
  CHECK(path_of(j) == "/type");
  j = good;
  j["scenario"]["n_a"] = 0;
  CHECK(path_of(j) == "/scenario");
  j = good;
  j["members"]["0|0,0"] = to_json(CMatrix(CMatrix::Identity(3, 3)));
  CHECK(path_of(j) == "/members/0|0,0");

  Json f = to_json(canonical_functional());
  f["coefficients"]["0,0,0"][0][1] = Json::array({0.0, 1.0});
  CHECK_THROWS_AS(functional_from_json(f), JsonInputError);
}
