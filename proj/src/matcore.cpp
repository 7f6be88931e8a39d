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

#include "pqsteer/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pqsteer/error.hpp"

namespace pqsteer {

namespace pauli {

CMatrix I() { return CMatrix::Identity(2, 2); }

CMatrix X() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

CMatrix Y() {
  CMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

CMatrix Z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

CMatrix by_index(int k) {
  switch (k) {
    case 0: return I();
    case 1: return X();
    case 2: return Y();
    case 3: return Z();
    default: throw InvalidInputError("pauli index out of range");
  }
}

}  // namespace pauli

CMatrix basis_projector(Eigen::Index d, Eigen::Index k) {
  CMatrix p = CMatrix::Zero(d, d);
  p(k, k) = 1.0;
  return p;
}

CMatrix outer(const CVector& v) { return v * v.adjoint(); }

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

namespace {

void check_bipartite(const CMatrix& m, Dims dims, const char* op) {
  const Eigen::Index n = dims.a * dims.b;
  if (dims.a < 1 || dims.b < 1 || m.rows() != n || m.cols() != n) {
    std::ostringstream os;
    os << op << ": matrix is " << m.rows() << "x" << m.cols()
       << " but dims give side " << n;
    throw DimensionError(os.str());
  }
}

}  // namespace

CMatrix partial_trace(const CMatrix& m, Dims dims, Subsystem keep) {
  check_bipartite(m, dims, "partial_trace");
  const auto [da, db] = dims;
  if (keep == Subsystem::B) {
    CMatrix out = CMatrix::Zero(db, db);
    for (Eigen::Index i = 0; i < da; ++i) {
      out += m.block(i * db, i * db, db, db);
    }
    return out;
  }
  CMatrix out(da, da);
  for (Eigen::Index i = 0; i < da; ++i) {
    for (Eigen::Index j = 0; j < da; ++j) {
      out(i, j) = m.block(i * db, j * db, db, db).trace();
    }
  }
  return out;
}

CMatrix partial_transpose(const CMatrix& m, Dims dims, Subsystem which) {
  check_bipartite(m, dims, "partial_transpose");
  const auto [da, db] = dims;
  CMatrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < da; ++i) {
    for (Eigen::Index j = 0; j < da; ++j) {
      if (which == Subsystem::B) {
        out.block(i * db, j * db, db, db) =
            m.block(i * db, j * db, db, db).transpose();
      } else {
        out.block(i * db, j * db, db, db) = m.block(j * db, i * db, db, db);
      }
    }
  }
  return out;
}

double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double hermitian_deviation(const CMatrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  return max_abs(m - m.adjoint());
}

bool is_hermitian(const CMatrix& m, double tol) {
  return hermitian_deviation(m) <= tol;
}

CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

namespace {

void require_hermitian(const CMatrix& m, const char* op) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(op) + ": matrix is not square");
  }
  const double scale = std::max(1.0, max_abs(m));
  const double dev = hermitian_deviation(m);
  if (dev > kHermitianTol * scale) {
    std::ostringstream os;
    os << op << ": input is not Hermitian (deviation " << dev << ")";
    throw InvalidInputError(os.str());
  }
}

}  // namespace

SpectralDecomposition eigh(const CMatrix& m) {
  require_hermitian(m, "eigh");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m));
  return {es.eigenvalues(), es.eigenvectors()};
}

RVector eigvalsh(const CMatrix& m) {
  require_hermitian(m, "eigvalsh");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m),
                                            Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double min_eigenvalue(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return eigvalsh(m)(0);
}

SupportOps support_ops(const CMatrix& m, double rank_tol) {
  const auto [vals, vecs] = eigh(m);
  const Eigen::Index n = vals.size();
  const double scale = n == 0 ? 0.0 : std::max(vals(n - 1), 1e-300);
  const double cutoff = rank_tol * scale;
  if (n > 0 && vals(0) < -cutoff) {
    std::ostringstream os;
    os << "support_ops: matrix has negative eigenvalue " << vals(0);
    throw InvalidInputError(os.str());
  }
  SupportOps out{CMatrix::Zero(n, n), CMatrix::Zero(n, n), CMatrix::Zero(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const CMatrix proj = outer(vecs.col(k));
    if (vals(k) > cutoff) {
      out.sqrt_pinv += proj / std::sqrt(vals(k));
      out.support_proj += proj;
    } else {
      out.kernel_proj += proj;
    }
  }
  return out;
}

CMatrix psd_sqrt(const CMatrix& m) {
  const auto [vals, vecs] = eigh(m);
  RVector roots = vals.cwiseMax(0.0).cwiseSqrt();
  return vecs * roots.cast<Complex>().asDiagonal() * vecs.adjoint();
}

bool is_psd(const CMatrix& m, double tol) { return min_eigenvalue(m) >= -tol; }

double trace_product(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.cols() || a.cols() != b.rows()) {
    throw DimensionError("trace_product: incompatible shapes");
  }
  // tr(AB) = sum_ij A_ij B_ji
  return (a.array() * b.transpose().array()).sum().real();
}

}  // namespace pqsteer
