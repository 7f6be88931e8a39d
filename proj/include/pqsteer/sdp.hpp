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

// Small dense semidefinite programs over real symmetric block-diagonal
// variables, solved with a primal-dual interior point method applied to the
// homogeneous self-dual embedding.
//
//   minimise    <C, X> + offset
//   subject to  <A_i, X> = b_i,   X = diag(X_1, ..., X_k) >= 0
//
// Complex Hermitian variables are handled by HermitianBuilder, which maps an
// n x n Hermitian block onto a 2n x 2n real symmetric block.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pqsteer/matcore.hpp"

namespace pqsteer::sdp {

/// Coefficient of the (row, col) entry of a block in a linear functional.
/// Entries with row != col refer to the single scalar X_rc = X_cr; the
/// functional value is sum(coeff * X_rc).
struct Term {
  int block;
  int row;
  int col;
  double coeff;
};

/// Sparse linear functional on block entries. Terms on the same entry are
/// merged; row/col are stored with row <= col.
class LinearForm {
 public:
  void add(int block, int row, int col, double coeff);
  void add(const LinearForm& other, double scale = 1.0);

  std::vector<Term> terms() const;
  bool empty() const { return coeffs_.empty(); }

 private:
  std::map<std::tuple<int, int, int>, double> coeffs_;
};

struct Equality {
  LinearForm lhs;
  double rhs = 0.0;
};

enum class Sense { Minimize, Maximize, Feasibility };

struct SdpProblem {
  std::vector<int> blocks;  // real symmetric side lengths
  LinearForm objective;
  double objective_offset = 0.0;
  std::vector<Equality> equalities;
  Sense sense = Sense::Minimize;

  /// Checks block references and index ranges; throws DimensionError.
  void validate() const;

  /// Plain-text dump: block sizes, then one line per constraint with
  /// "block row col coeff" triplets. Intended for external cross-checks.
  void dump(std::ostream& os) const;
};

struct SolveOptions {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iter = 200;
  /// Rows of the equality system whose pivot falls below this (relative)
  /// threshold are dropped as redundant.
  double redundancy_tol = 1e-10;
};

enum class Status { Optimal, Infeasible, Unbounded, MaxIter, NumericalTrouble };

const char* to_string(Status s);

struct Residuals {
  double primal_feas = 0.0;
  double dual_feas = 0.0;
  double gap = 0.0;
};

struct SdpSolution {
  Status status = Status::NumericalTrouble;
  /// Objective values in the caller's sense (sign restored for Maximize).
  double primal_value = 0.0;
  double dual_value = 0.0;
  std::vector<RMatrix> block_values;
  /// Multipliers for the original equality list (zero on dropped rows).
  RVector multipliers;
  Residuals residuals;
  int iterations = 0;
  int equalities_kept = 0;
  /// On Infeasible: Farkas multipliers y with A^T y <= 0 (as a PSD-cone
  /// statement) and b^T y > 0, normalised to b^T y = 1.
  RVector infeasibility_certificate;
  std::string message;

  bool optimal() const { return status == Status::Optimal; }
};

/// Real symmetric embedding [[Re H, -Im H], [Im H, Re H]] of a Hermitian
/// matrix. Throws InvalidInputError when `h` is not Hermitian.
RMatrix embed_hermitian(const CMatrix& h);

/// Inverse of the embedding, averaging the redundant copies.
CMatrix extract_hermitian(const RMatrix& y);

SdpSolution solve(const SdpProblem& problem, const SolveOptions& opts = {});

/// Builds problems whose variables are complex Hermitian PSD blocks.
///
/// Each complex block of side n becomes a real block of side 2n. Linear
/// expressions on complex entries are expressed through re()/im() and read
/// the entry from the symmetrised embedding, so any real PSD solution maps
/// back to a Hermitian PSD one with the same objective and constraints.
class HermitianBuilder {
 public:
  /// Adds a Hermitian PSD block of side n and returns its id.
  int add_block(int n);
  int block_side(int id) const { return sides_.at(id); }

  /// Adds coeff * Re(H_ij) to `form` (any i, j).
  void re(LinearForm& form, int block, int i, int j, double coeff) const;
  /// Adds coeff * Im(H_ij) to `form` (any i, j).
  void im(LinearForm& form, int block, int i, int j, double coeff) const;
  /// Adds Re(c * H_ij) to `form`.
  void re_scaled(LinearForm& form, int block, int i, int j, Complex c) const;
  /// Adds Im(c * H_ij) to `form`.
  void im_scaled(LinearForm& form, int block, int i, int j, Complex c) const;
  /// Adds coeff * Re tr(F H) for Hermitian F over the sub-block of
  /// `block` starting at (r0, c0).
  void trace_with(LinearForm& form, int block, int r0, int c0,
                  const CMatrix& f, double coeff = 1.0) const;

  /// Adds sum_i coeff * Re H_ii over a diagonal range.
  void trace(LinearForm& form, int block, int r0, int n, double coeff) const;

  void add_equality(LinearForm lhs, double rhs);

  /// Entry-wise complex equality sum_k terms_k(i,j) = rhs(i,j) for a
  /// matrix-valued constraint: one real equality per real degree of freedom.
  struct BlockRef {
    int block;
    int r0;
    int c0;
    Complex coeff;
    bool transpose = false;
  };
  void add_matrix_equality(const std::vector<BlockRef>& terms, int n,
                           const CMatrix& rhs, bool hermitian_rhs);

  LinearForm& objective() { return objective_; }
  void set_sense(Sense s) { sense_ = s; }
  void set_offset(double v) { offset_ = v; }

  /// Replaces every listed block H by P - t I with P >= 0 and a shared
  /// scalar t >= 0, and makes "minimise t" the objective. The optimum is
  /// the smallest uniform eigenvalue shift that makes the constraints
  /// satisfiable, so zero certifies feasibility and a positive value
  /// measures the violation.
  void minimize_shift(const std::vector<int>& blocks);
  bool has_shift() const { return !shifted_.empty(); }
  /// Value of the shift scalar t in a solution (0 without a shift).
  double shift_value(const SdpSolution& sol) const;

  SdpProblem build() const;

  /// The complex Hermitian value of a block in a solution (P - t I for
  /// shifted blocks).
  CMatrix value(const SdpSolution& sol, int block) const;

 private:
  std::vector<bool> shifted_;
  std::vector<int> sides_;
  std::vector<Equality> equalities_;
  LinearForm objective_;
  double offset_ = 0.0;
  Sense sense_ = Sense::Minimize;
};

}  // namespace pqsteer::sdp
