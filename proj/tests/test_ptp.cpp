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
#include <random>

#include "doctest.h"
#include "pqsteer/error.hpp"
#include "pqsteer/ptp.hpp"

using namespace pqsteer;

namespace {

std::vector<CMatrix> pauli_povm(int k) {
  return {0.5 * (pauli::I() + pauli::by_index(k)), 0.5 * (pauli::I() - pauli::by_index(k))};
}

// Random binary POVM {E, I - E}, E with spectrum in [0, 1].
std::vector<CMatrix> random_dichotomic(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const CMatrix v = random_unitary(2, rng());
  CMatrix diag = CMatrix::Zero(2, 2);
  diag(0, 0) = u(rng) < 0.5 ? 1.0 : u(rng);
  diag(1, 1) = u(rng) < 0.5 ? 0.0 : u(rng);
  const CMatrix e = hermitian_part(v * diag * v.adjoint());
  return {e, CMatrix::Identity(2, 2) - e};
}

double correlator(const PtpTable& t, int x, int y, int z) {
  double c = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) c += ((a + b) % 2 == 0 ? 1.0 : -1.0) * t(a, b, x, y, z);
  return c;
}

}  // namespace

TEST_CASE("apply_map examples") {
  const CMatrix m = 0.25 * (pauli::I() - pauli::Y());
  CHECK(max_abs(apply_map(LinearMapSpec::transpose(), m) - 0.25 * (pauli::I() + pauli::Y())) < 1e-16);
  const CMatrix r = random_density_matrix(3, 7);
  CHECK(apply_map(LinearMapSpec::identity(), r) == r);
  const CMatrix h = 0.5 * (pauli::I() + pauli::Y());
  CHECK(max_abs(apply_map(y_flip_map(), h) - 0.5 * (pauli::I() - pauli::Y())) < 1e-15);
  // On qubits the Y flip is the transpose, also on non-Hermitian input.
  const CMatrix g = random_unitary(2, 3);
  CHECK(max_abs(apply_map(y_flip_map(), g) - g.transpose()) < 1e-15);

  CHECK_THROWS_AS(apply_map(y_flip_map(), r), DimensionError);
  CHECK_THROWS_AS(apply_map(LinearMapSpec::transpose(), CMatrix::Zero(2, 3)), DimensionError);
  CHECK_THROWS_AS(LinearMapSpec::pauli_action({SignedPauli{1, 1}, SignedPauli{1, 1},
                                               SignedPauli{2, 1}, SignedPauli{3, 1}}),
                  InvalidInputError);
}

TEST_CASE("dual map satisfies the trace duality") {
  const LinearMapSpec rot = LinearMapSpec::pauli_action(
      {SignedPauli{0, 1}, SignedPauli{2, 1}, SignedPauli{1, -1}, SignedPauli{3, 1}});
  for (const LinearMapSpec& s : {LinearMapSpec::identity(), LinearMapSpec::transpose(), y_flip_map(), rot}) {
    const CMatrix n = random_density_matrix(2, 11), m = random_unitary(2, 12);
    const Complex lhs = (n * apply_map(s, m)).trace();
    const Complex rhs = (apply_dual(s, n) * m).trace();
    CHECK(std::abs(lhs - rhs) < 1e-14);
  }
}

TEST_CASE("dual_povm examples") {
  const auto z = pauli_povm(3);
  const auto zt = dual_povm(LinearMapSpec::transpose(), z);
  for (int b = 0; b < 2; ++b) CHECK(max_abs(zt[b] - z[b]) == 0.0);
  const auto y = pauli_povm(2);
  const auto yt = dual_povm(LinearMapSpec::transpose(), y);
  CHECK(max_abs(yt[0] - y[1]) < 1e-16);
  CHECK(max_abs(yt[1] - y[0]) < 1e-16);
  const auto yi = dual_povm(LinearMapSpec::identity(), y);
  CHECK(yi == y);
  CHECK(max_abs(yt[0] + yt[1] - CMatrix::Identity(2, 2)) <= 1e-12);

  CHECK_THROWS_AS(dual_povm(LinearMapSpec::identity(), {pauli::I(), pauli::I()}), InvalidInputError);
}

TEST_CASE("positivity of Pauli actions") {
  CHECK(y_flip_map().is_positive());
  CHECK(LinearMapSpec::transpose().is_positive());
  const LinearMapSpec squash = LinearMapSpec::pauli_action(
      {SignedPauli{0, 1}, SignedPauli{3, 1}, SignedPauli{2, 1}, SignedPauli{3, 1}});
  CHECK(squash.bloch_norm() == doctest::Approx(std::sqrt(2.0)));
  CHECK_FALSE(squash.is_positive());
  PtpModelSpec spec = pauli_transpose_model();
  spec.maps[1] = squash;
  CHECK_THROWS_AS(ptp_bell_model(spec, {pauli_povm(3)}), InvalidInputError);

  // Amplitude damping (gamma = 0.3): non-unital but positive.
  RMatrix t = RMatrix::Zero(4, 4);
  const double g = 0.3;
  t(0, 0) = 1.0;
  t(1, 1) = t(2, 2) = std::sqrt(1 - g);
  t(3, 3) = 1 - g;
  t(3, 0) = g;
  CHECK(LinearMapSpec::from_transfer(t).is_positive());
  t(3, 0) = 0.6;
  CHECK_FALSE(LinearMapSpec::from_transfer(t).is_positive());
}

TEST_CASE("Choi matrices") {
  for (int d : {2, 3}) {
    const ChoiMatrix ci = choi(LinearMapSpec::identity(), d);
    CVector phi = CVector::Zero(d * d);
    for (int k = 0; k < d; ++k) phi(k * d + k) = 1.0 / std::sqrt(static_cast<double>(d));
    CHECK(max_abs(ci.matrix - d * outer(phi)) < 1e-15);
    CHECK(ci.trace() == doctest::Approx(d));
    CHECK(ci.min_eigenvalue() > -1e-12);

    // Transpose gives the swap operator, spectrum {+1, -1}.
    const ChoiMatrix ct = choi(LinearMapSpec::transpose(), d);
    CHECK(ct.min_eigenvalue() == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(ct.trace() == doctest::Approx(d));
    CHECK(max_abs(ct.matrix * ct.matrix - CMatrix::Identity(d * d, d * d)) < 1e-14);
  }
  const ChoiMatrix cl = choi(y_flip_map());
  CHECK(cl.min_eigenvalue() == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(cl.min_eigenvalue() / cl.trace() == doctest::Approx(-0.5).epsilon(1e-9));

  // Unitary conjugations are CP; an odd number of sign flips is not.
  const LinearMapSpec zconj = LinearMapSpec::pauli_action(
      {SignedPauli{0, 1}, SignedPauli{1, -1}, SignedPauli{2, -1}, SignedPauli{3, 1}});
  const LinearMapSpec rot = LinearMapSpec::pauli_action(
      {SignedPauli{0, 1}, SignedPauli{2, 1}, SignedPauli{1, -1}, SignedPauli{3, 1}});
  CHECK(choi(zconj).min_eigenvalue() > -1e-12);
  CHECK(choi(rot).min_eigenvalue() > -1e-12);
  const LinearMapSpec zflip = LinearMapSpec::pauli_action(
      {SignedPauli{0, 1}, SignedPauli{1, 1}, SignedPauli{2, 1}, SignedPauli{3, -1}});
  CHECK(choi(zflip).min_eigenvalue() < -0.5);
  CHECK_THROWS_AS(choi(y_flip_map(), 3), DimensionError);
}

TEST_CASE("transposition Bell model") {
  const PtpModelSpec spec = pauli_transpose_model();
  const std::vector<CMatrix> z = pauli_povm(3);
  const PtpBellModel m = ptp_bell_model(spec, {z});
  const BwiAssemblage ref = pauli_transpose_assemblage();
  for (std::size_t k = 0; k < ref.members().size(); ++k)
    CHECK(max_abs(m.assemblage.members()[k] - ref.members()[k]) < 1e-15);
  const BellTable direct = bell_correlations(ref, z);
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) CHECK(m.table(a, b, x, y, 0) == doctest::Approx(direct(a, b, x, y)));
  CHECK(m.path_deviation <= 1e-10);

  const PtpBellModel xy = ptp_bell_model(spec, {pauli_povm(1), pauli_povm(2)});
  CHECK(xy.table.normalization_residual() < 1e-12);
  CHECK(xy.witness_table.normalization_residual() < 1e-12);
  CHECK(xy.path_deviation <= 1e-10);
  // Witness for y = 1 transposes Bob's Y effect.
  CHECK(max_abs(xy.witness[(1 * 2 + 1) * 2 + 0] - 0.5 * (pauli::I() - pauli::Y())) < 1e-15);
}

TEST_CASE("CHSH values of the transposition model stay below Tsirelson") {
  const PtpModelSpec spec = pauli_transpose_model();
  std::mt19937_64 rng(2024);
  double best = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const PtpBellModel m = ptp_bell_model(spec, {random_dichotomic(rng), random_dichotomic(rng)});
    REQUIRE(m.path_deviation <= 1e-10);
    const int x0 = static_cast<int>(rng() % 3), x1 = (x0 + 1 + static_cast<int>(rng() % 2)) % 3;
    const int y0 = static_cast<int>(rng() % 2), y1 = static_cast<int>(rng() % 2);
    const double e[2][2] = {{correlator(m.table, x0, y0, 0), correlator(m.table, x0, y1, 1)},
                            {correlator(m.table, x1, y0, 0), correlator(m.table, x1, y1, 1)}};
    const double sum = e[0][0] + e[0][1] + e[1][0] + e[1][1];
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) best = std::max(best, std::abs(sum - 2 * e[i][j]));
  }
  CHECK(best <= 2 * std::sqrt(2.0) + 1e-6);
  CHECK(best > 2.0);  // sampling reaches past the classical bound
}

TEST_CASE("pure-state lemma certificate") {
  const CertificateReport r = pure_state_lemma_check(pauli_transpose_assemblage(), 1);
  CHECK(r.status == LemmaStatus::PostQuantum);
  REQUIRE(r.maps.size() == 1);
  RMatrix expected = RMatrix::Identity(4, 4);
  expected(2, 2) = -1.0;
  CHECK((r.maps[0].transfer - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(r.maps[0].choi_min_eigenvalue == doctest::Approx(-1.0).epsilon(1e-9));

  // y-independent members: the identity map.
  BwiAssemblage flat = pauli_transpose_assemblage();
  for (int a = 0; a < 2; ++a)
    for (int x = 0; x < 3; ++x) flat.at(a, x, 1) = flat.at(a, x, 0);
  const CertificateReport f = pure_state_lemma_check(flat, 0);
  CHECK(f.status == LemmaStatus::NoCertificate);
  CHECK((f.maps[0].transfer - RMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);

  // Unitarily rotated y = 1 members.
  const CMatrix u = random_unitary(2, 99);
  BwiAssemblage rot = flat;
  for (int a = 0; a < 2; ++a)
    for (int x = 0; x < 3; ++x) rot.at(a, x, 1) = u * flat.at(a, x, 0) * u.adjoint();
  const CertificateReport g = pure_state_lemma_check(rot, 0);
  CHECK(g.status == LemmaStatus::NoCertificate);
  CHECK(g.maps[0].choi_min_eigenvalue > -1e-9);
}

TEST_CASE("pure-state lemma degenerate inputs") {
  // Mixed reference members.
  CHECK_THROWS_AS(pure_state_lemma_check(random_quantum_bwi({2, 3, 2, 2, ScenarioKind::BobWithInput}, 1), 0),
                  InvalidInputError);
  // A single input spans only I and one Pauli.
  BwiAssemblage one({2, 1, 2, 2, ScenarioKind::BobWithInput});
  for (int a = 0; a < 2; ++a)
    for (int y = 0; y < 2; ++y) one.at(a, 0, y) = pauli_transpose_assemblage().at(a, 0, y);
  CHECK(pure_state_lemma_check(one, 0).status == LemmaStatus::Inconclusive);
  BwiAssemblage qutrit({2, 2, 2, 3, ScenarioKind::BobWithInput});
  CHECK(pure_state_lemma_check(qutrit, 0).status == LemmaStatus::Inconclusive);
  CHECK_THROWS_AS(pure_state_lemma_check(pauli_transpose_assemblage(), 2), InvalidInputError);
}
