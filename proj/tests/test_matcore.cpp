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
#include "pqsteer/matcore.hpp"

using namespace pqsteer;

namespace {

CMatrix phi_plus() {
  CVector v = CVector::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  return outer(v);
}

CMatrix random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  return hermitian_part(m);
}

}  // namespace

TEST_CASE("kron") {
  CHECK(kron(pauli::I(), pauli::I()).isApprox(CMatrix::Identity(4, 4)));

  CMatrix zz = CMatrix::Zero(4, 4);
  zz.diagonal() << 1, -1, -1, 1;
  CHECK(kron(pauli::Z(), pauli::Z()).isApprox(zz));

  CVector v00 = CVector::Zero(4);
  v00(0) = 1;
  const CVector out = kron(pauli::X(), pauli::I()) * v00;
  CHECK(std::abs(out(2) - Complex(1.0)) < 1e-15);
  CHECK(out.norm() == doctest::Approx(1.0));

  CMatrix a(2, 3);
  a << 1, 2, 3, 4, 5, 6;
  const CMatrix k = kron(a, pauli::X());
  CHECK(k.rows() == 4);
  CHECK(k.cols() == 6);
}

TEST_CASE("partial_trace") {
  CHECK(partial_trace(phi_plus(), {2, 2}, Subsystem::B).isApprox(0.5 * pauli::I()));

  std::mt19937_64 rng(7);
  const CMatrix a = random_hermitian(3, rng);
  const CMatrix b = random_hermitian(2, rng);
  const CMatrix ab = kron(a, b);
  CHECK(partial_trace(ab, {3, 2}, Subsystem::B).isApprox(a.trace() * b, 1e-12));
  CHECK(partial_trace(ab, {3, 2}, Subsystem::A).isApprox(b.trace() * a, 1e-12));

  const CMatrix proj = kron(basis_projector(2, 0), pauli::I());
  const CMatrix steered = partial_trace(proj * phi_plus(), {2, 2}, Subsystem::B);
  CHECK(max_abs(steered - 0.5 * basis_projector(2, 0)) < 1e-15);

  CHECK_THROWS_AS(partial_trace(CMatrix::Identity(5, 5), {2, 2}, Subsystem::B),
                  DimensionError);

  for (int t = 0; t < 10; ++t) {
    const CMatrix m = random_hermitian(6, rng);
    CHECK(std::abs(partial_trace(m, {2, 3}, Subsystem::A).trace() - m.trace()) < 1e-12);
    CHECK(std::abs(partial_trace(m, {2, 3}, Subsystem::B).trace() - m.trace()) < 1e-12);
  }
}

TEST_CASE("partial_transpose") {
  std::mt19937_64 rng(11);
  const CMatrix a = random_hermitian(2, rng);
  const CMatrix b = random_hermitian(3, rng);
  CHECK(partial_transpose(kron(a, b), {2, 3}, Subsystem::B).isApprox(kron(a, b.transpose())));
  CHECK(partial_transpose(kron(a, b), {2, 3}, Subsystem::A).isApprox(kron(a.transpose(), b)));

  const RVector ev = eigvalsh(partial_transpose(phi_plus(), {2, 2}, Subsystem::B));
  CHECK(ev(0) == doctest::Approx(-0.5));
  CHECK(ev(1) == doctest::Approx(0.5));
  CHECK(ev(2) == doctest::Approx(0.5));
  CHECK(ev(3) == doctest::Approx(0.5));

  const CMatrix m = random_hermitian(6, rng);
  const CMatrix twice =
      partial_transpose(partial_transpose(m, {3, 2}, Subsystem::A), {3, 2}, Subsystem::A);
  CHECK(max_abs(twice - m) == 0.0);
}

TEST_CASE("eigh") {
  const auto z = eigh(pauli::Z());
  CHECK(z.eigenvalues(0) == doctest::Approx(-1));
  CHECK(z.eigenvalues(1) == doctest::Approx(1));

  const auto x = eigh(pauli::X());
  CHECK(x.eigenvalues(0) == doctest::Approx(-1));
  CHECK(x.eigenvalues(1) == doctest::Approx(1));
  const double r = 1.0 / std::sqrt(2.0);
  // Eigenvectors are fixed only up to phase: compare projectors.
  CVector minus(2), plus(2);
  minus << r, -r;
  plus << r, r;
  CHECK(max_abs(outer(x.eigenvectors.col(0)) - outer(minus)) < 1e-14);
  CHECK(max_abs(outer(x.eigenvectors.col(1)) - outer(plus)) < 1e-14);

  const RVector p = eigvalsh(0.5 * (pauli::I() + pauli::X()));
  CHECK(std::abs(p(0)) < 1e-15);
  CHECK(p(1) == doctest::Approx(1));

  CMatrix bad(2, 2);
  bad << 0, 1, 0, 0;
  CHECK_THROWS_AS(eigh(bad), InvalidInputError);

  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const CMatrix m = random_hermitian(5, rng);
    const auto sd = eigh(m);
    const CMatrix v = sd.eigenvectors;
    const CMatrix recon = v * sd.eigenvalues.cast<Complex>().asDiagonal() * v.adjoint();
    CHECK(max_abs(recon - m) <= 1e-10 * std::max(1.0, max_abs(m)));
    CHECK(max_abs(v.adjoint() * v - CMatrix::Identity(5, 5)) < 1e-10);
    CHECK(std::abs(sd.eigenvalues.sum() - m.trace().real()) < 1e-10);
    for (int k = 1; k < 5; ++k) CHECK(sd.eigenvalues(k - 1) <= sd.eigenvalues(k));
  }
}

TEST_CASE("support_ops") {
  const auto full = support_ops(0.5 * pauli::I());
  CHECK(max_abs(full.sqrt_pinv - std::sqrt(2.0) * pauli::I()) < 1e-14);
  CHECK(max_abs(full.support_proj - pauli::I()) < 1e-14);
  CHECK(max_abs(full.kernel_proj) < 1e-14);

  const auto rank1 = support_ops(0.5 * basis_projector(2, 0));
  CHECK(max_abs(rank1.sqrt_pinv - std::sqrt(2.0) * basis_projector(2, 0)) < 1e-14);
  CHECK(max_abs(rank1.support_proj - basis_projector(2, 0)) < 1e-14);
  CHECK(max_abs(rank1.kernel_proj - basis_projector(2, 1)) < 1e-14);

  CMatrix sr = CMatrix::Zero(2, 2);
  sr.diagonal() << 0.75, 0.25;
  const auto ops = support_ops(sr);
  CHECK(std::abs(ops.sqrt_pinv(0, 0) - Complex(2.0 / std::sqrt(3.0))) < 1e-14);
  CHECK(std::abs(ops.sqrt_pinv(1, 1) - Complex(2.0)) < 1e-14);

  CHECK_THROWS_AS(support_ops(pauli::Z()), InvalidInputError);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int t = 0; t < 10; ++t) {
    CMatrix b(4, 2);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 2; ++j) b(i, j) = Complex(g(rng), g(rng));
    const CMatrix m = b * b.adjoint();
    const auto so = support_ops(m);
    CHECK(max_abs(so.support_proj + so.kernel_proj - CMatrix::Identity(4, 4)) < 1e-10);
    CHECK(max_abs(so.kernel_proj * m * so.kernel_proj) < kRankTol * 10 * max_abs(m));
    CHECK(max_abs(so.sqrt_pinv * m * so.sqrt_pinv - so.support_proj) < 1e-9);
    CHECK(so.support_proj.trace().real() == doctest::Approx(2.0));
  }
}

TEST_CASE("is_psd and psd_sqrt") {
  CHECK(is_psd(CMatrix::Identity(3, 3), 1e-8));
  CHECK_FALSE(is_psd(partial_transpose(phi_plus(), {2, 2}, Subsystem::B), 1e-8));
  CHECK(is_psd(CMatrix::Zero(2, 2), 1e-8));

  CMatrix m(2, 2);
  m << 2, Complex(0, 1), Complex(0, -1), 2;
  const CMatrix s = psd_sqrt(m);
  CHECK(max_abs(s * s - m) < 1e-13);
  CHECK(is_hermitian(s));
}

TEST_CASE("pauli algebra and helpers") {
  CHECK(max_abs(pauli::X() * pauli::Y() - Complex(0, 1) * pauli::Z()) < 1e-15);
  CHECK(max_abs(pauli::Y().transpose() + pauli::Y()) == 0.0);
  CHECK_THROWS(pauli::by_index(4));
  CHECK(trace_product(pauli::Z(), basis_projector(2, 1)) == doctest::Approx(-1));
  CHECK(hermitian_deviation(pauli::Y()) == 0.0);
}
