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

#include "pqsteer/ghjw.hpp"

#include <algorithm>
#include <cmath>

#include "pqsteer/error.hpp"

namespace pqsteer {

namespace {

struct SharedState {
  CVector psi;
  int rank = 0;
  SupportOps ops;
};

SharedState ghjw_state(const CMatrix& sigma_r) {
  const Eigen::Index d = sigma_r.rows();
  const SpectralDecomposition sd = eigh(sigma_r);
  const double top = std::max(1e-300, sd.eigenvalues.maxCoeff());
  SharedState out;
  out.ops = support_ops(sigma_r);
  out.psi = CVector::Zero(d * d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double mu = sd.eigenvalues(k);
    if (mu <= kRankTol * top) continue;
    const CVector r = sd.eigenvectors.col(k);
    out.psi += std::sqrt(mu) * kron(r.conjugate(), r);
    ++out.rank;
  }
  return out;
}

CMatrix steer(const CVector& psi, const CMatrix& alice_op) {
  const Eigen::Index d = alice_op.rows();
  const CMatrix op = kron(alice_op, CMatrix::Identity(d, d));
  return hermitian_part(partial_trace(op * outer(psi), {d, d}, Subsystem::B));
}

// Largest entry of Q m Q for the kernel projector Q.
double leakage(const CMatrix& kernel, const CMatrix& m) {
  return max_abs(kernel * m * kernel);
}

}  // namespace

double TraditionalRealization::completeness_residual() const {
  double worst = 0.0;
  for (int x = 0; x < shape.m_a; ++x) {
    CMatrix sum = CMatrix::Zero(shape.d, shape.d);
    for (int a = 0; a < shape.n_a; ++a) sum += povm(a, x);
    worst = std::max(worst, max_abs(sum - CMatrix::Identity(shape.d, shape.d)));
  }
  return worst;
}

double SequentialRealization::kraus_residual() const {
  double worst = 0.0;
  for (int x1 = 0; x1 < shape.m_x1; ++x1) {
    CMatrix sum = CMatrix::Zero(shape.d, shape.d);
    for (int a1 = 0; a1 < shape.n_a1; ++a1) {
      const CMatrix& k = kraus_op(a1, x1);
      sum += k.adjoint() * k;
    }
    worst = std::max(worst, max_abs(sum - CMatrix::Identity(shape.d, shape.d)));
  }
  return worst;
}

double SequentialRealization::completeness_residual() const {
  double worst = 0.0;
  for (int x1 = 0; x1 < shape.m_x1; ++x1)
    for (int a1 = 0; a1 < shape.n_a1; ++a1)
      for (int x2 = 0; x2 < shape.m_x2; ++x2) {
        CMatrix sum = CMatrix::Zero(shape.d, shape.d);
        for (int a2 = 0; a2 < shape.n_a2; ++a2) sum += second_povm(a1, x1, a2, x2);
        worst = std::max(worst, max_abs(sum - CMatrix::Identity(shape.d, shape.d)));
      }
  return worst;
}

double support_leakage(const BwiAssemblage& s) {
  double worst = 0.0;
  for (int y = 0; y < s.shape().m_b; ++y) {
    const CMatrix kernel = support_ops(s.reduced(0, y)).kernel_proj;
    for (int x = 0; x < s.shape().m_a; ++x)
      for (int a = 0; a < s.shape().n_a; ++a)
        worst = std::max(worst, leakage(kernel, s.at(a, x, y)));
  }
  return worst;
}

TraditionalRealization ghjw_traditional(const BwiAssemblage& s, double tol) {
  if (s.shape().m_b != 1) {
    throw InvalidInputError("ghjw_traditional: assemblage has a Bob input (m_b > 1)");
  }
  const ValidationReport rep = validate_ns_bwi(s, tol);
  if (!rep.passed) {
    throw InvalidInputError("ghjw_traditional: assemblage is not non-signalling (" +
                            rep.failures() + ")");
  }
  const SharedState st = ghjw_state(s.reduced(0));
  TraditionalRealization out;
  out.shape = s.shape();
  out.state = st.psi;
  out.support_rank = st.rank;
  for (int x = 0; x < s.shape().m_a; ++x) {
    for (int a = 0; a < s.shape().n_a; ++a) {
      CMatrix m = st.ops.sqrt_pinv * s.at(a, x) * st.ops.sqrt_pinv;
      if (a == 0) m += st.ops.kernel_proj;
      out.povms.push_back(hermitian_part(m.transpose()));
    }
  }
  return out;
}

BwiAssemblage reconstruct_traditional(const TraditionalRealization& real) {
  BwiAssemblage out(real.shape);
  for (int x = 0; x < real.shape.m_a; ++x)
    for (int a = 0; a < real.shape.n_a; ++a) out.at(a, x) = steer(real.state, real.povm(a, x));
  return out;
}

SequentialRealization ghjw_sequential(const SequentialAssemblage& s, double tol) {
  const ValidationReport rep = validate_ns_sequential(s, tol);
  if (!rep.passed) {
    throw InvalidInputError("ghjw_sequential: assemblage is not non-signalling (" +
                            rep.failures() + ")");
  }
  const SequentialShape& sh = s.shape();
  const SharedState st = ghjw_state(s.reduced(0, 0));

  SequentialRealization out;
  out.shape = sh;
  out.state = st.psi;
  out.support_rank = st.rank;
  out.kraus.resize(static_cast<std::size_t>(sh.n_a1) * sh.m_x1);
  out.second.resize(static_cast<std::size_t>(sh.member_count()));

  for (int x1 = 0; x1 < sh.m_x1; ++x1) {
    for (int a1 = 0; a1 < sh.n_a1; ++a1) {
      const CMatrix first = hermitian_part(s.first_stage(a1, x1, 0));
      const double scale = std::max(1.0, max_abs(first));
      if (leakage(st.ops.kernel_proj, first) > 10 * tol * scale) {
        throw InvalidInputError("ghjw_sequential: first-stage member leaves the support "
                                "of the reduced state");
      }
      const CMatrix root = psd_sqrt(first);
      const SupportOps inner = support_ops(first);

      CMatrix k = (st.ops.sqrt_pinv * root).transpose();
      if (a1 == 0) k += st.ops.kernel_proj.transpose();
      out.kraus[x1 * sh.n_a1 + a1] = k;

      for (int x2 = 0; x2 < sh.m_x2; ++x2) {
        for (int a2 = 0; a2 < sh.n_a2; ++a2) {
          const CMatrix& member = s.at(a1, a2, x1, x2);
          if (leakage(inner.kernel_proj, member) > 10 * tol * scale) {
            throw InvalidInputError("ghjw_sequential: second-stage member leaves the "
                                    "support of its first-stage marginal");
          }
          CMatrix m = inner.sqrt_pinv * member * inner.sqrt_pinv;
          if (a2 == 0) m += inner.kernel_proj;
          out.second[((x1 * sh.n_a1 + a1) * sh.m_x2 + x2) * sh.n_a2 + a2] =
              hermitian_part(m.transpose());
        }
      }
    }
  }
  return out;
}

SequentialAssemblage reconstruct_sequential(const SequentialRealization& real) {
  const SequentialShape& sh = real.shape;
  SequentialAssemblage out(sh);
  for (int x1 = 0; x1 < sh.m_x1; ++x1)
    for (int a1 = 0; a1 < sh.n_a1; ++a1) {
      const CMatrix& k = real.kraus_op(a1, x1);
      for (int x2 = 0; x2 < sh.m_x2; ++x2)
        for (int a2 = 0; a2 < sh.n_a2; ++a2) {
          const CMatrix effect = k.adjoint() * real.second_povm(a1, x1, a2, x2) * k;
          out.at(a1, a2, x1, x2) = steer(real.state, effect);
        }
    }
  return out;
}

double max_deviation(const BwiAssemblage& a, const BwiAssemblage& b) {
  if (!(a.shape() == b.shape())) throw DimensionError("max_deviation: shapes differ");
  double worst = 0.0;
  for (std::size_t k = 0; k < a.members().size(); ++k)
    worst = std::max(worst, max_abs(a.members()[k] - b.members()[k]));
  return worst;
}

double max_deviation(const SequentialAssemblage& a, const SequentialAssemblage& b) {
  if (!(a.shape() == b.shape())) throw DimensionError("max_deviation: shapes differ");
  double worst = 0.0;
  for (std::size_t k = 0; k < a.members().size(); ++k)
    worst = std::max(worst, max_abs(a.members()[k] - b.members()[k]));
  return worst;
}

}  // namespace pqsteer
