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

#include <cmath>

#include "doctest.h"
#include "pqsteer/error.hpp"
#include "pqsteer/steering.hpp"

using namespace pqsteer;

namespace {

const ScenarioShape kCanon{2, 3, 2, 2, ScenarioKind::BobWithInput};

SteeringFunctional constant_functional(const ScenarioShape& sh, double c) {
  SteeringFunctional f(sh);
  for (int k = 0; k < sh.member_count(); ++k) {
    const int a = k % sh.n_a, rest = k / sh.n_a;
    f.at(a, rest / sh.m_b, rest % sh.m_b) = c * CMatrix::Identity(sh.d, sh.d);
  }
  return f;
}

// Independent LHS value: for each deterministic strategy the best states
// are ground states of sum_x F_{lambda(x) x y}, one per y.
double lhs_by_enumeration(const SteeringFunctional& f) {
  const ScenarioShape& sh = f.shape();
  double best = INFINITY;
  int count = 1;
  for (int x = 0; x < sh.m_a; ++x) count *= sh.n_a;
  for (int code = 0; code < count; ++code) {
    std::vector<int> lam(sh.m_a);
    int c = code;
    for (int x = sh.m_a - 1; x >= 0; --x) {
      lam[x] = c % sh.n_a;
      c /= sh.n_a;
    }
    double v = 0.0;
    for (int y = 0; y < sh.m_b; ++y) {
      CMatrix g = CMatrix::Zero(sh.d, sh.d);
      for (int x = 0; x < sh.m_a; ++x) g += f.at(lam[x], x, y);
      v += min_eigenvalue(g);
    }
    best = std::min(best, v);
  }
  return best;
}

}  // namespace

TEST_CASE("canonical functional operators") {
  const SteeringFunctional f = canonical_functional();
  CHECK(f.shape() == kCanon);
  CMatrix minus(2, 2);
  minus << 0.5, -0.5, -0.5, 0.5;
  CHECK(max_abs(f.at(0, 0, 0) - minus) < 1e-16);
  CHECK(max_abs(f.at(0, 1, 1) - 0.5 * (pauli::I() + pauli::Y())) < 1e-16);
  for (const CMatrix& m : f.coeffs()) {
    const RVector ev = eigvalsh(m);
    CHECK(std::abs(ev(0)) < 1e-15);
    CHECK(std::abs(ev(1) - 1.0) < 1e-15);
    CHECK(max_abs(m * m - m) < 1e-15);
  }
}

TEST_CASE("evaluate") {
  const SteeringFunctional f = canonical_functional();
  CHECK(std::abs(evaluate(f, pauli_transpose_assemblage())) < 1e-10);
  const BwiAssemblage q = random_quantum_bwi(kCanon, 3);
  CHECK(evaluate(SteeringFunctional(kCanon), q) == 0.0);
  CHECK(evaluate(constant_functional(kCanon, 1.0), q) == doctest::Approx(6.0));

  // Linearity along a segment of assemblages.
  const BwiAssemblage p = random_quantum_bwi(kCanon, 4);
  std::vector<CMatrix> mix;
  for (std::size_t k = 0; k < p.members().size(); ++k)
    mix.push_back(0.3 * p.members()[k] + 0.7 * q.members()[k]);
  const BwiAssemblage m(kCanon, mix);
  CHECK(evaluate(f, m) ==
        doctest::Approx(0.3 * evaluate(f, p) + 0.7 * evaluate(f, q)).epsilon(1e-12));

  CHECK_THROWS_AS(evaluate(f, pr_box_assemblage()), DimensionError);
  std::vector<CMatrix> bad(12, CMatrix::Zero(2, 2));
  bad[0](0, 1) = 1.0;
  CHECK_THROWS_AS(SteeringFunctional(kCanon, bad), InvalidInputError);
}

TEST_CASE("strategy enumeration") {
  const auto s = enumerate_strategies(2, 3);
  REQUIRE(s.size() == 8);
  CHECK(s.front() == std::vector<int>{0, 0, 0});
  CHECK(s[1] == std::vector<int>{0, 0, 1});
  CHECK(s.back() == std::vector<int>{1, 1, 1});
  CHECK(enumerate_strategies(2, 12).size() == 4096);
  CHECK_THROWS_AS(enumerate_strategies(2, 13), InvalidInputError);
}

TEST_CASE("LHS bound of the canonical functional") {
  const LhsBound b = lhs_bound(canonical_functional());
  CHECK(b.result.value == doctest::Approx(1.2679).epsilon(1e-3 / 1.2679));
  CHECK(b.result.value == doctest::Approx(3.0 - std::sqrt(3.0)).epsilon(1e-7));
  CHECK(b.result.value == doctest::Approx(lhs_by_enumeration(canonical_functional())).epsilon(1e-7));

  // The returned model is a valid LHS model reaching the bound.
  const LhsModel& m = b.model;
  CHECK(m.strategies.size() == 8);
  for (const CMatrix& w : m.omega) CHECK(min_eigenvalue(w) > -1e-8);
  const BwiAssemblage s = m.assemblage();
  CHECK(validate_ns_bwi(s, 1e-7).passed);
  CHECK(evaluate(canonical_functional(), s) == doctest::Approx(b.result.value).epsilon(1e-7));
}

TEST_CASE("normalisation-forced values") {
  // F = I/12 gives sum_{x,y} tr sigma / 12 = m_a m_b / 12.
  const SteeringFunctional f = constant_functional(kCanon, 1.0 / 12.0);
  const double expected = kCanon.m_a * kCanon.m_b / 12.0;
  CHECK(lhs_bound(f).result.value == doctest::Approx(expected).epsilon(1e-7));
  CHECK(ns_bound(f).result.value == doctest::Approx(expected).epsilon(1e-7));
  CHECK(qtilde_bound(f).result.value == doctest::Approx(expected).epsilon(1e-6));
  const SteeringFunctional g = constant_functional(kCanon, 1.0 / 6.0);
  CHECK(ns_bound(g).result.value == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("single-input LHS bound equals NS bound") {
  const ScenarioShape sh{2, 1, 2, 2, ScenarioKind::BobWithInput};
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const SteeringFunctional f = random_psd_functional(sh, seed);
    CHECK(lhs_bound(f).result.value ==
          doctest::Approx(ns_bound(f).result.value).epsilon(1e-6));
    CHECK(lhs_bound(f).result.value ==
          doctest::Approx(lhs_by_enumeration(f)).epsilon(1e-6));
  }
}

TEST_CASE("NS bound") {
  const NsBound b = ns_bound(canonical_functional());
  CHECK(std::abs(b.result.value) < 1e-6);
  CHECK(validate_ns_bwi(b.optimizer, 1e-7).passed);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    CHECK(ns_bound(random_psd_functional(kCanon, seed)).result.value >= -1e-8);
  }
}

TEST_CASE("Q~ bound of the canonical functional") {
  const QtildeProgram p = build_qtilde_problem(canonical_functional());
  CHECK(p.words.size() == 12);
  CHECK(p.problem.blocks[p.gamma] == 48);
  const QtildeBound b = qtilde_bound(canonical_functional());
  CHECK(b.result.value == doctest::Approx(0.4135).epsilon(5e-3 / 0.4135));
  CHECK(b.result.equalities_kept < b.result.equalities_raw);
  for (const auto& c : moment_residuals(b.moment)) {
    INFO(c.name);
    CHECK(c.residual <= 1e-7);
  }
  CHECK(validate_ns_bwi(b.optimizer, 1e-7).passed);
  CHECK(evaluate(canonical_functional(), b.optimizer) ==
        doctest::Approx(b.result.value).epsilon(1e-6));

  // Post-quantum margin of the Pauli/transpose assemblage.
  CHECK(b.result.value - evaluate(canonical_functional(), pauli_transpose_assemblage()) > 0.4);
}

TEST_CASE("degenerate word set") {
  const ScenarioShape sh{2, 1, 1, 2, ScenarioKind::BobWithInput};
  const SteeringFunctional f = random_psd_functional(sh, 5);
  const QtildeProgram p = build_qtilde_problem(f);
  CHECK(p.words.size() == 4);
  // With one input each side every NS assemblage is quantum, so all three
  // bounds coincide.
  const double ns = ns_bound(f).result.value;
  CHECK(qtilde_bound(f).result.value == doctest::Approx(ns).epsilon(1e-6));
  CHECK(lhs_bound(f).result.value == doctest::Approx(ns).epsilon(1e-6));

  CHECK_THROWS_AS(build_qtilde_problem(SteeringFunctional({3, 1, 1, 2})), InvalidInputError);
}

TEST_CASE("bound ordering on random PSD functionals") {
  for (std::uint64_t seed = 10; seed < 14; ++seed) {
    const SteeringFunctional f = random_psd_functional(kCanon, seed);
    const double ns = ns_bound(f).result.value;
    const double qt = qtilde_bound(f).result.value;
    const double lhs = lhs_bound(f).result.value;
    CHECK(ns >= -1e-8);
    CHECK(ns <= qt + 1e-6);
    CHECK(qt <= lhs + 1e-6);
  }
}

TEST_CASE("LHS membership") {
  // Separable, y-independent: Alice's outcome labels a mixture of product states.
  BwiAssemblage sep(kCanon);
  const CMatrix r0 = random_density_matrix(2, 1), r1 = random_density_matrix(2, 2);
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 2; ++y) {
      const double p = 0.2 + 0.2 * x;
      sep.at(0, x, y) = 0.5 * p * r0 + 0.5 * (1 - p) * r1;
      sep.at(1, x, y) = 0.5 * (1 - p) * r0 + 0.5 * p * r1;
    }
  REQUIRE(validate_ns_bwi(sep).passed);
  const LhsMembership m = lhs_membership(sep);
  CHECK(m.report.feasible);
  CHECK(max_abs(m.model.assemblage().members()[3] - sep.members()[3]) < 1e-6);
  CHECK(evaluate(canonical_functional(), sep) >= lhs_bound(canonical_functional()).result.value - 1e-6);

  CHECK_FALSE(lhs_membership(pr_box_assemblage()).report.feasible);
  CHECK_FALSE(lhs_membership(pauli_transpose_assemblage()).report.feasible);
}

TEST_CASE("Q~ membership") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const QtildeMembership m = qtilde_membership(random_quantum_bwi(kCanon, seed));
    CHECK(m.report.feasible);
    for (const auto& c : moment_residuals(m.moment, 1e-6)) CHECK(c.passed);
  }
  const QtildeMembership pt = qtilde_membership(pauli_transpose_assemblage());
  CHECK_FALSE(pt.report.feasible);
  CHECK(pt.report.margin > 1e-3);
  // The relaxation is not tight enough to exclude the PR box.
  CHECK(qtilde_membership(pr_box_assemblage()).report.feasible);
}

TEST_CASE("instrumental bound") {
  const InstrumentalFunctional g = post_select(canonical_functional());
  CHECK(evaluate(g, instrumental_from_bwi(pauli_transpose_assemblage())) == doctest::Approx(0.0));
  const QtildeBound b = qtilde_instrumental_bound(g);
  // Zero: the members with y != a are free, and the relaxation uses that.
  CHECK(b.result.value == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(b.result.value <= qtilde_bound(lift(g)).result.value + 1e-9);

  InstrumentalFunctional c(ScenarioShape{2, 3, 2, 2, ScenarioKind::Instrumental});
  for (int a = 0; a < 2; ++a)
    for (int x = 0; x < 3; ++x) c.at(a, x) = pauli::I() / 6.0;
  // sum_x sum_a tr sigma_{a|xa} / 6 = sum_x 1 / 6.
  CHECK(qtilde_instrumental_bound(c).result.value == doctest::Approx(0.5).epsilon(1e-6));
}
