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

#include "pqsteer/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace pqsteer {

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& msg) {
  throw JsonInputError("schema error at " + (path.empty() ? std::string("/") : path) + ": " + msg,
                       JsonInputError::npos, path.empty() ? "/" : path);
}

const Json& field(const Json& j, const char* name, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected an object");
  const auto it = j.find(name);
  if (it == j.end()) schema_error(path + "/" + name, "missing field");
  return *it;
}

int int_field(const Json& j, const char* name, const std::string& path) {
  const Json& v = field(j, name, path);
  if (!v.is_number_integer()) schema_error(path + "/" + name, "expected an integer");
  return v.get<int>();
}

double finite(double v) {
  if (!std::isfinite(v)) throw InvalidInputError("non-finite value cannot be serialised");
  return v;
}

void expect_type(const Json& j, const char* type) {
  const Json& t = field(j, "type", "");
  if (!t.is_string() || t.get<std::string>() != type) {
    schema_error("/type", std::string("expected \"") + type + "\"");
  }
}

ScenarioKind kind_from_string(const std::string& s, const std::string& path) {
  for (ScenarioKind k : {ScenarioKind::Traditional, ScenarioKind::BobWithInput,
                         ScenarioKind::Sequential, ScenarioKind::Instrumental}) {
    if (s == to_string(k)) return k;
  }
  schema_error(path, "unknown scenario kind \"" + s + "\"");
}

std::string scenario_kind(const Json& j) {
  const Json& sc = field(j, "scenario", "");
  const Json& k = field(sc, "kind", "/scenario");
  if (!k.is_string()) schema_error("/scenario/kind", "expected a string");
  return k.get<std::string>();
}

// Reads an object of count matrices; key(k) names the k-th entry.
template <class KeyFn>
std::vector<CMatrix> keyed_matrices(const Json& j, const char* name, int count, int d, KeyFn key) {
  const std::string base = std::string("/") + name;
  const Json& obj = field(j, name, "");
  if (!obj.is_object()) schema_error(base, "expected an object");
  if (static_cast<int>(obj.size()) != count) {
    schema_error(base, "expected " + std::to_string(count) + " entries, found " + std::to_string(obj.size()));
  }
  std::vector<CMatrix> out(count);
  for (int k = 0; k < count; ++k) {
    const std::string kk = key(k);
    const auto it = obj.find(kk);
    if (it == obj.end()) schema_error(base + "/" + kk, "missing entry");
    out[k] = matrix_from_json(*it, base + "/" + kk);
    if (d > 0 && out[k].rows() != d) {
      schema_error(base + "/" + kk, "expected side " + std::to_string(d));
    }
  }
  return out;
}

template <class T>
T wrap(const std::string& path, T (*make)(ScenarioShape, std::vector<CMatrix>), ScenarioShape sh,
       std::vector<CMatrix> m) {
  try {
    return make(sh, std::move(m));
  } catch (const JsonInputError&) {
    throw;
  } catch (const Error& e) {
    schema_error(path, e.what());
  }
}

// Key from a flat member index, matching each container's index layout.
std::string bwi_key(const ScenarioShape& sh, int k) {
  const int a = k % sh.n_a, rest = k / sh.n_a;
  const int y = rest % sh.m_b, x = rest / sh.m_b;
  if (sh.kind == ScenarioKind::Traditional) return std::to_string(a) + "|" + std::to_string(x);
  return std::to_string(a) + "|" + std::to_string(x) + "," + std::to_string(y);
}

std::string fn_key(const ScenarioShape& sh, int k) {
  const int a = k % sh.n_a, rest = k / sh.n_a;
  const int y = rest % sh.m_b, x = rest / sh.m_b;
  return std::to_string(a) + "," + std::to_string(x) + "," + std::to_string(y);
}

std::string seq_key(const SequentialShape& sh, int k) {
  const int a2 = k % sh.n_a2, r1 = k / sh.n_a2;
  const int a1 = r1 % sh.n_a1, r2 = r1 / sh.n_a1;
  const int x2 = r2 % sh.m_x2, x1 = r2 / sh.m_x2;
  return std::to_string(a1) + "," + std::to_string(a2) + "|" + std::to_string(x1) + "," +
         std::to_string(x2);
}

// Second-stage effects, index ((x1 * n_a1 + a1) * m_x2 + x2) * n_a2 + a2.
std::string second_key(const SequentialShape& sh, int k) {
  const int a2 = k % sh.n_a2, r1 = k / sh.n_a2;
  const int x2 = r1 % sh.m_x2, r2 = r1 / sh.m_x2;
  const int a1 = r2 % sh.n_a1, x1 = r2 / sh.n_a1;
  return std::to_string(a1) + "," + std::to_string(a2) + "|" + std::to_string(x1) + "," +
         std::to_string(x2);
}

std::string ax_key(int n_a, int k, const char* sep) {
  return std::to_string(k % n_a) + sep + std::to_string(k / n_a);
}

template <class KeyFn>
Json keyed_object(const std::vector<CMatrix>& ms, KeyFn key) {
  Json obj = Json::object();
  for (int k = 0; k < static_cast<int>(ms.size()); ++k) obj[key(k)] = to_json(ms[k]);
  return obj;
}

}  // namespace

Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::ostringstream os;
    os << "parse error at byte " << e.byte << ": " << e.what();
    throw JsonInputError(os.str(), e.byte, "");
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str());
}

Json to_json(Complex z) { return Json::array({finite(z.real()), finite(z.imag())}); }

Json to_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const CVector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_json(v(i)));
  return out;
}

Json to_json(const ScenarioShape& s) {
  return Json{{"kind", to_string(s.kind)}, {"n_a", s.n_a}, {"m_a", s.m_a}, {"m_b", s.m_b}, {"d", s.d}};
}

Json to_json(const SequentialShape& s) {
  return Json{{"kind", "sequential"}, {"n_a1", s.n_a1}, {"m_x1", s.m_x1},
              {"n_a2", s.n_a2}, {"m_x2", s.m_x2}, {"d", s.d}};
}

Complex complex_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    schema_error(path, "expected [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

CMatrix matrix_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) schema_error(path, "expected a non-empty array of rows");
  const std::size_t n = j.size();
  CMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string rp = path + "/" + std::to_string(i);
    if (!j[i].is_array() || j[i].size() != n) schema_error(rp, "expected a row of length " + std::to_string(n));
    for (std::size_t c = 0; c < n; ++c) m(i, c) = complex_from_json(j[i][c], rp + "/" + std::to_string(c));
  }
  return m;
}

CVector vector_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) schema_error(path, "expected a non-empty array");
  CVector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = complex_from_json(j[i], path + "/" + std::to_string(i));
  return v;
}

ScenarioShape shape_from_json(const Json& j, const std::string& path) {
  const Json& k = field(j, "kind", path);
  if (!k.is_string()) schema_error(path + "/kind", "expected a string");
  ScenarioShape s;
  s.kind = kind_from_string(k.get<std::string>(), path + "/kind");
  if (s.kind == ScenarioKind::Sequential) schema_error(path + "/kind", "sequential shape here is not allowed");
  s.n_a = int_field(j, "n_a", path);
  s.m_a = int_field(j, "m_a", path);
  s.m_b = int_field(j, "m_b", path);
  s.d = int_field(j, "d", path);
  try {
    s.check();
  } catch (const Error& e) {
    schema_error(path, e.what());
  }
  return s;
}

SequentialShape sequential_shape_from_json(const Json& j, const std::string& path) {
  const Json& k = field(j, "kind", path);
  if (!k.is_string() || k.get<std::string>() != "sequential") schema_error(path + "/kind", "expected \"sequential\"");
  SequentialShape s;
  s.n_a1 = int_field(j, "n_a1", path);
  s.m_x1 = int_field(j, "m_x1", path);
  s.n_a2 = int_field(j, "n_a2", path);
  s.m_x2 = int_field(j, "m_x2", path);
  s.d = int_field(j, "d", path);
  try {
    s.check();
  } catch (const Error& e) {
    schema_error(path, e.what());
  }
  return s;
}

Json to_json(const BwiAssemblage& s) {
  const ScenarioShape sh = s.shape();
  return Json{{"type", "assemblage"}, {"scenario", to_json(sh)},
              {"members", keyed_object(s.members(), [&](int k) { return bwi_key(sh, k); })}};
}

Json to_json(const SequentialAssemblage& s) {
  const SequentialShape sh = s.shape();
  return Json{{"type", "assemblage"}, {"scenario", to_json(sh)},
              {"members", keyed_object(s.members(), [&](int k) { return seq_key(sh, k); })}};
}

Json to_json(const InstrumentalAssemblage& s) {
  const int n_a = s.shape().n_a;
  return Json{{"type", "assemblage"}, {"scenario", to_json(s.shape())},
              {"members", keyed_object(s.members(), [&](int k) { return ax_key(n_a, k, "|"); })}};
}

Json to_json(const SteeringFunctional& f) {
  const ScenarioShape sh = f.shape();
  return Json{{"type", "functional"}, {"scenario", to_json(sh)},
              {"coefficients", keyed_object(f.coeffs(), [&](int k) { return fn_key(sh, k); })}};
}

Json to_json(const InstrumentalFunctional& f) {
  const int n_a = f.shape().n_a;
  return Json{{"type", "functional"}, {"scenario", to_json(f.shape())},
              {"coefficients", keyed_object(f.coeffs(), [&](int k) { return ax_key(n_a, k, ","); })}};
}

Json to_json(const TraditionalRealization& r) {
  const int n_a = r.shape.n_a;
  return Json{{"type", "traditional_realization"}, {"scenario", to_json(r.shape)},
              {"support_rank", r.support_rank}, {"state", to_json(r.state)},
              {"povms", keyed_object(r.povms, [&](int k) { return ax_key(n_a, k, "|"); })}};
}

Json to_json(const SequentialRealization& r) {
  const SequentialShape sh = r.shape;
  return Json{{"type", "sequential_realization"}, {"scenario", to_json(sh)},
              {"support_rank", r.support_rank}, {"state", to_json(r.state)},
              {"kraus", keyed_object(r.kraus, [&](int k) { return ax_key(sh.n_a1, k, "|"); })},
              {"second", keyed_object(r.second, [&](int k) { return second_key(sh, k); })}};
}

BwiAssemblage bwi_from_json(const Json& j) {
  expect_type(j, "assemblage");
  const ScenarioShape sh = shape_from_json(field(j, "scenario", ""));
  if (sh.kind != ScenarioKind::BobWithInput && sh.kind != ScenarioKind::Traditional) {
    schema_error("/scenario/kind", "expected \"bwi\" or \"traditional\"");
  }
  if (sh.kind == ScenarioKind::Traditional && sh.m_b != 1) schema_error("/scenario/m_b", "traditional needs m_b = 1");
  auto m = keyed_matrices(j, "members", sh.member_count(), sh.d, [&](int k) { return bwi_key(sh, k); });
  return wrap<BwiAssemblage>("/members", [](ScenarioShape s, std::vector<CMatrix> v) {
    return BwiAssemblage(s, std::move(v)); }, sh, std::move(m));
}

SequentialAssemblage sequential_from_json(const Json& j) {
  expect_type(j, "assemblage");
  const SequentialShape sh = sequential_shape_from_json(field(j, "scenario", ""));
  auto m = keyed_matrices(j, "members", sh.member_count(), sh.d, [&](int k) { return seq_key(sh, k); });
  try {
    return SequentialAssemblage(sh, std::move(m));
  } catch (const Error& e) {
    schema_error("/members", e.what());
  }
}

InstrumentalAssemblage instrumental_from_json(const Json& j) {
  expect_type(j, "assemblage");
  const ScenarioShape sh = shape_from_json(field(j, "scenario", ""));
  if (sh.kind != ScenarioKind::Instrumental) schema_error("/scenario/kind", "expected \"instrumental\"");
  auto m = keyed_matrices(j, "members", sh.n_a * sh.m_a, sh.d, [&](int k) { return ax_key(sh.n_a, k, "|"); });
  return wrap<InstrumentalAssemblage>("/members", [](ScenarioShape s, std::vector<CMatrix> v) {
    return InstrumentalAssemblage(s, std::move(v)); }, sh, std::move(m));
}

SteeringFunctional functional_from_json(const Json& j) {
  expect_type(j, "functional");
  const ScenarioShape sh = shape_from_json(field(j, "scenario", ""));
  if (sh.kind == ScenarioKind::Instrumental) schema_error("/scenario/kind", "instrumental functional here");
  auto m = keyed_matrices(j, "coefficients", sh.member_count(), sh.d, [&](int k) { return fn_key(sh, k); });
  return wrap<SteeringFunctional>("/coefficients", [](ScenarioShape s, std::vector<CMatrix> v) {
    return SteeringFunctional(s, std::move(v)); }, sh, std::move(m));
}

InstrumentalFunctional instrumental_functional_from_json(const Json& j) {
  expect_type(j, "functional");
  const ScenarioShape sh = shape_from_json(field(j, "scenario", ""));
  if (sh.kind != ScenarioKind::Instrumental) schema_error("/scenario/kind", "expected \"instrumental\"");
  auto m = keyed_matrices(j, "coefficients", sh.n_a * sh.m_a, sh.d, [&](int k) { return ax_key(sh.n_a, k, ","); });
  return wrap<InstrumentalFunctional>("/coefficients", [](ScenarioShape s, std::vector<CMatrix> v) {
    return InstrumentalFunctional(s, std::move(v)); }, sh, std::move(m));
}

TraditionalRealization traditional_realization_from_json(const Json& j) {
  expect_type(j, "traditional_realization");
  TraditionalRealization r;
  r.shape = shape_from_json(field(j, "scenario", ""));
  r.support_rank = int_field(j, "support_rank", "");
  r.state = vector_from_json(field(j, "state", ""), "/state");
  if (r.state.size() != r.shape.d * r.shape.d) schema_error("/state", "expected length d^2");
  r.povms = keyed_matrices(j, "povms", r.shape.n_a * r.shape.m_a, r.shape.d,
                           [&](int k) { return ax_key(r.shape.n_a, k, "|"); });
  return r;
}

SequentialRealization sequential_realization_from_json(const Json& j) {
  expect_type(j, "sequential_realization");
  SequentialRealization r;
  r.shape = sequential_shape_from_json(field(j, "scenario", ""));
  const SequentialShape& sh = r.shape;
  r.support_rank = int_field(j, "support_rank", "");
  r.state = vector_from_json(field(j, "state", ""), "/state");
  if (r.state.size() != sh.d * sh.d) schema_error("/state", "expected length d^2");
  r.kraus = keyed_matrices(j, "kraus", sh.n_a1 * sh.m_x1, sh.d, [&](int k) { return ax_key(sh.n_a1, k, "|"); });
  r.second = keyed_matrices(j, "second", sh.member_count(), sh.d, [&](int k) { return second_key(sh, k); });
  return r;
}

AnyAssemblage assemblage_from_json(const Json& j) {
  const std::string k = scenario_kind(j);
  if (k == "sequential") return sequential_from_json(j);
  if (k == "instrumental") return instrumental_from_json(j);
  return bwi_from_json(j);
}

AnyFunctional any_functional_from_json(const Json& j) {
  if (scenario_kind(j) == "instrumental") return instrumental_functional_from_json(j);
  return functional_from_json(j);
}

}  // namespace pqsteer
