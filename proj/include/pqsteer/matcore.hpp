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

// Dense complex linear algebra used throughout the library. Matrices are
// Eigen dynamic complex matrices; every routine here is a pure function.

#include <complex>
#include <utility>

#include <Eigen/Dense>

namespace pqsteer {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Elementwise tolerance for treating a matrix as Hermitian.
inline constexpr double kHermitianTol = 1e-12;
/// Default support cutoff, relative to the largest eigenvalue.
inline constexpr double kRankTol = 1e-9;

/// Which tensor factor of a bipartite operator an operation acts on.
enum class Subsystem { A = 0, B = 1 };

struct Dims {
  Eigen::Index a;
  Eigen::Index b;
};

struct SpectralDecomposition {
  RVector eigenvalues;   // ascending
  CMatrix eigenvectors;  // columns, unitary
};

struct SupportOps {
  CMatrix sqrt_pinv;     // sum over support of mu^{-1/2} |r><r|
  CMatrix support_proj;
  CMatrix kernel_proj;
};

namespace pauli {
CMatrix I();
CMatrix X();
CMatrix Y();
CMatrix Z();
/// k = 0..3 -> I, X, Y, Z.
CMatrix by_index(int k);
}  // namespace pauli

/// Computational-basis projector |k><k| of dimension d.
CMatrix basis_projector(Eigen::Index d, Eigen::Index k);

/// |v><v| for an (unnormalised) vector v.
CMatrix outer(const CVector& v);

CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Traces out the subsystem not equal to `keep`.
CMatrix partial_trace(const CMatrix& m, Dims dims, Subsystem keep);

/// Transposes the `which` factor in the computational basis.
CMatrix partial_transpose(const CMatrix& m, Dims dims, Subsystem which);

/// Largest elementwise deviation |M - M^dagger|.
double hermitian_deviation(const CMatrix& m);

bool is_hermitian(const CMatrix& m, double tol = kHermitianTol);

/// (M + M^dagger) / 2.
CMatrix hermitian_part(const CMatrix& m);

/// Full spectral decomposition of a Hermitian matrix, eigenvalues ascending.
/// Throws InvalidInputError when `m` is not Hermitian within kHermitianTol
/// scaled by max(1, |m|_max).
SpectralDecomposition eigh(const CMatrix& m);

/// Eigenvalues only, ascending. Same Hermiticity contract as eigh.
RVector eigvalsh(const CMatrix& m);

double min_eigenvalue(const CMatrix& m);

/// Support calculus for a PSD matrix. Eigenvalues at or below
/// rank_tol * max(1e-300, lambda_max) are treated as zero.
/// Throws InvalidInputError on an eigenvalue below -rank_tol * scale.
SupportOps support_ops(const CMatrix& m, double rank_tol = kRankTol);

/// Principal square root of a PSD matrix (negative noise clipped).
CMatrix psd_sqrt(const CMatrix& m);

bool is_psd(const CMatrix& m, double tol);

/// Largest elementwise absolute entry.
double max_abs(const CMatrix& m);

/// Real part of tr(A B), for Hermitian A and B a real scalar.
double trace_product(const CMatrix& a, const CMatrix& b);

}  // namespace pqsteer
