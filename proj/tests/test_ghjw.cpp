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
#include "pqsteer/ghjw.hpp"

using namespace pqsteer;

namespace {

CMatrix phi_plus() {
  CVector v = CVector::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  return outer(v);
}

// Alice measures Z (x = 0) or X (x = 1) on her half of a Bell pair.
BwiAssemblage bell_pair_assemblage() {
  BwiAssemblage s({2, 2, 1, 2, ScenarioKind::Traditional});
  const CMatrix rho = phi_plus();
  const CMatrix xs[2] = {pauli::Z(), pauli::X()};
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a) {
      const CMatrix effect = 0.5 * (pauli::I() + (a == 0 ? 1.0 : -1.0) * xs[x]);
      s.at(a, x) = partial_trace(kron(effect, pauli::I()) * rho, {2, 2}, Subsystem::B);
    }
  return s;
}

void check_povms_psd(const TraditionalRealization& r) {
  for (const CMatrix& m : r.povms) CHECK(min_eigenvalue(m) > -1e-9);
}

}  // namespace

TEST_CASE("ghjw on a Bell-pair assemblage") {
  const BwiAssemblage s = bell_pair_assemblage();
  const TraditionalRealization r = ghjw_traditional(s);
  CHECK(r.support_rank == 2);
  CHECK(r.state.norm() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.completeness_residual() < 1e-9);
  check_povms_psd(r);
  CHECK(max_deviation(reconstruct_traditional(r), s) < 1e-9);
}

TEST_CASE("single outcome assemblage completes to the identity") {
  const CMatrix rho = random_density_matrix(3, 2);
  BwiAssemblage s({1, 1, 1, 3, ScenarioKind::Traditional}, {rho});
  const TraditionalRealization r = ghjw_traditional(s);
  CHECK(max_abs(r.povm(0, 0) - CMatrix::Identity(3, 3)) < 1e-9);
  CHECK(max_deviation(reconstruct_traditional(r), s) < 1e-12);
}

TEST_CASE("rank deficient reduced state") {
  BwiAssemblage s({2, 2, 1, 2, ScenarioKind::Traditional});
  for (int x = 0; x < 2; ++x) {
    s.at(0, x) = (x == 0 ? 0.5 : 0.3) * basis_projector(2, 0);
    s.at(1, x) = (x == 0 ? 0.5 : 0.7) * basis_projector(2, 0);
  }
  const TraditionalRealization r = ghjw_traditional(s);
  CHECK(r.support_rank == 1);
  CHECK(r.completeness_residual() < 1e-12);
  check_povms_psd(r);
  // The kernel completion sits on the a = 0 effect.
  CHECK(std::abs(r.povm(0, 0)(1, 1) - Complex(1.0)) < 1e-12);
  CHECK(std::abs(r.povm(1, 0)(1, 1)) < 1e-12);
  CHECK(max_deviation(reconstruct_traditional(r), s) < 1e-12);
}

TEST_CASE("link product identity") {
  CVector phi = CVector::Zero(9);
  for (int k = 0; k < 3; ++k) phi(4 * k) = 1.0;
  const CMatrix a = random_density_matrix(3, 21);
  const CMatrix general = random_unitary(3, 22);  // not Hermitian on purpose
  for (const CMatrix& m : {a, general}) {
    const CMatrix out =
        partial_trace(kron(m.transpose(), CMatrix::Identity(3, 3)) * outer(phi), {3, 3},
                      Subsystem::B);
    CHECK(max_abs(out - m) < 1e-13);
  }
}

TEST_CASE("pure state assemblage reconstructs exactly") {
  const CMatrix u = random_unitary(2, 4);
  const CMatrix pure = outer(u.col(0));
  BwiAssemblage s({2, 3, 1, 2, ScenarioKind::Traditional});
  const double p[3] = {0.2, 0.5, 0.9};
  for (int x = 0; x < 3; ++x) {
    s.at(0, x) = p[x] * pure;
    s.at(1, x) = (1 - p[x]) * pure;
  }
  const TraditionalRealization r = ghjw_traditional(s);
  CHECK(r.support_rank == 1);
  CHECK(max_deviation(reconstruct_traditional(r), s) < 1e-12);
}

TEST_CASE("random NS traditional round trip") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const int m_a = 1 + static_cast<int>(seed % 3);
    const int d = 2 + static_cast<int>(seed % 2);
    const BwiAssemblage s = random_ns_traditional(2, m_a, random_density_matrix(d, seed), seed);
    CHECK(support_leakage(s) < 1e-9);
    const TraditionalRealization r = ghjw_traditional(s);
    CHECK(r.completeness_residual() < 1e-9);
    check_povms_psd(r);
    CHECK(max_deviation(reconstruct_traditional(r), s) < 1e-9);
  }
}

TEST_CASE("ghjw rejects invalid input") {
  BwiAssemblage s = bell_pair_assemblage();
  s.at(0, 0) *= 1.2;
  CHECK_THROWS_AS(ghjw_traditional(s), InvalidInputError);
  CHECK_THROWS_AS(ghjw_traditional(pr_box_assemblage()), InvalidInputError);

  SequentialAssemblage q = random_ns_sequential({2, 2, 2, 2, 2}, 1);
  q.at(0, 0, 0, 1) += 0.1 * pauli::I();
  CHECK_THROWS_AS(ghjw_sequential(q), InvalidInputError);
}

TEST_CASE("sequential round trip") {
  const SequentialShape sh{2, 2, 2, 2, 2};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (const SequentialAssemblage& s :
         {random_ns_sequential(sh, seed), random_quantum_sequential(sh, seed)}) {
      const SequentialRealization r = ghjw_sequential(s);
      CHECK(r.kraus_residual() < 1e-9);
      CHECK(r.completeness_residual() < 1e-9);
      for (const CMatrix& m : r.second) CHECK(min_eigenvalue(m) > -1e-9);
      const SequentialAssemblage back = reconstruct_sequential(r);
      CHECK(max_deviation(back, s) < 1e-8);
      for (int x1 = 0; x1 < 2; ++x1)
        for (int a1 = 0; a1 < 2; ++a1)
          CHECK(max_abs(back.first_stage(a1, x1, 1) - s.first_stage(a1, x1, 1)) < 1e-9);
    }
  }
}

TEST_CASE("trivial second stage reduces to the traditional construction") {
  const BwiAssemblage trad = random_ns_traditional(2, 2, random_density_matrix(2, 9), 9);
  SequentialAssemblage s({2, 2, 1, 1, 2});
  for (int x1 = 0; x1 < 2; ++x1)
    for (int a1 = 0; a1 < 2; ++a1) s.at(a1, 0, x1, 0) = trad.at(a1, x1);
  const SequentialRealization seq = ghjw_sequential(s);
  const TraditionalRealization tr = ghjw_traditional(trad);
  CHECK(max_abs(seq.state - tr.state) < 1e-14);
  for (int x1 = 0; x1 < 2; ++x1)
    for (int a1 = 0; a1 < 2; ++a1) {
      const CMatrix& k = seq.kraus_op(a1, x1);
      CHECK(max_abs(k.adjoint() * k - tr.povm(a1, x1)) < 1e-9);
      CHECK(max_abs(seq.second_povm(a1, x1, 0, 0) - CMatrix::Identity(2, 2)) < 1e-9);
    }
  CHECK(max_deviation(reconstruct_sequential(seq), s) < 1e-9);
}

TEST_CASE("deterministic first stage gives a unitary Kraus operator") {
  const SequentialShape sh{2, 2, 2, 2, 2};
  const BwiAssemblage tau = random_ns_traditional(2, 2, random_density_matrix(2, 12), 12);
  SequentialAssemblage s(sh);
  for (int x1 = 0; x1 < 2; ++x1)
    for (int x2 = 0; x2 < 2; ++x2)
      for (int a2 = 0; a2 < 2; ++a2) s.at(0, a2, x1, x2) = tau.at(a2, x2);
  const SequentialRealization r = ghjw_sequential(s);
  for (int x1 = 0; x1 < 2; ++x1) {
    const CMatrix& k = r.kraus_op(0, x1);
    CHECK(max_abs(k.adjoint() * k - CMatrix::Identity(2, 2)) < 1e-9);
    CHECK(max_abs(k * k.adjoint() - CMatrix::Identity(2, 2)) < 1e-9);
  }
  CHECK(max_deviation(reconstruct_sequential(r), s) < 1e-9);
}
