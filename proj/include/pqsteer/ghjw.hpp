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

// Explicit quantum models for non-signalling traditional and two-stage
// sequential assemblages, together with the reconstruction maps used to
// verify them.
//
// Alice's space is a copy of Bob's, C^d. The shared state is
//   |psi> = sum_r sqrt(mu_r) |conj r> (x) |r>
// over the support of sigma_R; with this choice every operator below is a
// plain transpose in the computational basis and the construction does not
// depend on how the eigenvectors of sigma_R are phased.

#include <vector>

#include "pqsteer/assemblage.hpp"

namespace pqsteer {

struct TraditionalRealization {
  ScenarioShape shape;
  CVector state;            // on C^d (x) C^d, Alice first
  int support_rank = 0;     // |S_R|, the Schmidt rank of the state
  std::vector<CMatrix> povms;  // index x * n_a + a

  const CMatrix& povm(int a, int x) const { return povms[x * shape.n_a + a]; }
  /// max_x |sum_a M_{a|x} - I|
  double completeness_residual() const;
};

struct SequentialRealization {
  SequentialShape shape;
  CVector state;
  int support_rank = 0;
  std::vector<CMatrix> kraus;   // index x1 * n_a1 + a1
  std::vector<CMatrix> second;  // index ((x1 * n_a1 + a1) * m_x2 + x2) * n_a2 + a2

  const CMatrix& kraus_op(int a1, int x1) const { return kraus[x1 * shape.n_a1 + a1]; }
  const CMatrix& second_povm(int a1, int x1, int a2, int x2) const {
    return second[((x1 * shape.n_a1 + a1) * shape.m_x2 + x2) * shape.n_a2 + a2];
  }
  /// max_x1 |sum_a1 K^dagger K - I|
  double kraus_residual() const;
  /// max over (a1, x1, x2) of |sum_a2 M - I|
  double completeness_residual() const;
};

/// Requires a traditional (m_b = 1) non-signalling assemblage; throws
/// InvalidInputError otherwise.
TraditionalRealization ghjw_traditional(const BwiAssemblage& asm_,
                                        double tol = kValidationTol);

/// sigma_{a|x} = tr_A[(M_{a|x} (x) I) |psi><psi|]
BwiAssemblage reconstruct_traditional(const TraditionalRealization& real);

/// Throws InvalidInputError on NS violations and when a second-stage member
/// leaves the support of its first-stage marginal.
SequentialRealization ghjw_sequential(const SequentialAssemblage& asm_,
                                      double tol = kValidationTol);

/// sigma_{a1 a2|x1 x2} = tr_A[(K^dagger M K (x) I) |psi><psi|]
SequentialAssemblage reconstruct_sequential(const SequentialRealization& real);

/// Largest entry of P_ker sigma P_ker over the members, where P_ker is the
/// kernel projector of the reduced state.
double support_leakage(const BwiAssemblage& asm_);

/// Largest member-wise deviation between two assemblages of equal shape.
double max_deviation(const BwiAssemblage& a, const BwiAssemblage& b);
double max_deviation(const SequentialAssemblage& a, const SequentialAssemblage& b);

}  // namespace pqsteer
