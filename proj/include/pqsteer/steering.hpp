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

// Linear steering functionals and the bounds they admit over three sets of
// Bob-with-input assemblages: local hidden state (LHS), non-signalling (NS)
// and the moment-matrix relaxation Q~ of the quantum set, which contains
// every quantum assemblage.
//
// Q~ is built for dichotomic Alice (n_a = 2). Its moment matrix is indexed
// by the words {0} u {x} u {y} u {xy}, each word carrying a d x d block, in
// that order with xy words x-major.

#include <cstdint>
#include <string>
#include <vector>

#include "pqsteer/assemblage.hpp"
#include "pqsteer/sdp.hpp"

namespace pqsteer {

/// Coefficients F_{axy}, laid out like BwiAssemblage members.
class SteeringFunctional {
 public:
  SteeringFunctional() = default;
  explicit SteeringFunctional(ScenarioShape shape);
  /// Throws DimensionError on a shape mismatch and InvalidInputError when a
  /// coefficient is not Hermitian.
  SteeringFunctional(ScenarioShape shape, std::vector<CMatrix> coeffs);

  const ScenarioShape& shape() const { return shape_; }
  const CMatrix& at(int a, int x, int y = 0) const { return coeffs_[index(a, x, y)]; }
  CMatrix& at(int a, int x, int y = 0) { return coeffs_[index(a, x, y)]; }
  const std::vector<CMatrix>& coeffs() const { return coeffs_; }
  int index(int a, int x, int y) const;
  void check_hermitian() const;
  bool operator==(const SteeringFunctional& o) const;

 private:
  ScenarioShape shape_;
  std::vector<CMatrix> coeffs_;
};

/// Coefficients F_{ax} for the instrumental scenario (index x * n_a + a).
class InstrumentalFunctional {
 public:
  InstrumentalFunctional() = default;
  explicit InstrumentalFunctional(ScenarioShape shape);
  InstrumentalFunctional(ScenarioShape shape, std::vector<CMatrix> coeffs);

  const ScenarioShape& shape() const { return shape_; }
  const CMatrix& at(int a, int x) const { return coeffs_[index(a, x)]; }
  CMatrix& at(int a, int x) { return coeffs_[index(a, x)]; }
  const std::vector<CMatrix>& coeffs() const { return coeffs_; }
  int index(int a, int x) const;
  bool operator==(const InstrumentalFunctional& o) const;

 private:
  ScenarioShape shape_;
  std::vector<CMatrix> coeffs_;
};

/// sum_{a,x,y} tr(F_{axy} sigma_{a|xy}). Throws DimensionError on a shape
/// mismatch and InvalidInputError if the imaginary part exceeds 1e-10.
double evaluate(const SteeringFunctional& f, const BwiAssemblage& asm_);
double evaluate(const InstrumentalFunctional& f, const InstrumentalAssemblage& asm_);

/// F_{axy} = (I - (-1)^a P_x)^{T^y} / 2 with P = (X, Y, Z), shape (2,3,2,2).
SteeringFunctional canonical_functional();

/// F_{ax} = F_{a,x,y=a}. Requires m_b >= n_a.
InstrumentalFunctional post_select(const SteeringFunctional& f);

/// Embeds an instrumental functional as a BWI functional that vanishes off
/// y = a (m_b = n_a).
SteeringFunctional lift(const InstrumentalFunctional& f);

/// F_{axy} = G G^dagger / d with G complex Gaussian.
SteeringFunctional random_psd_functional(const ScenarioShape& shape, std::uint64_t seed);

/// Common solver report for the bound computations.
struct BoundResult {
  double value = 0.0;
  sdp::Status status = sdp::Status::NumericalTrouble;
  sdp::Residuals residuals;
  int iterations = 0;
  int equalities_raw = 0;
  int equalities_kept = 0;
  /// Real symmetric side of every PSD block handed to the solver.
  std::vector<int> block_sides;
  double seconds = 0.0;
};

inline constexpr int kMaxStrategies = 4096;

/// Deterministic response functions lambda: x -> a in lexicographic order
/// (lambda(0) most significant). Throws InvalidInputError beyond
/// kMaxStrategies.
std::vector<std::vector<int>> enumerate_strategies(int n_a, int m_a);

struct LhsModel {
  ScenarioShape shape;
  std::vector<std::vector<int>> strategies;
  /// omega_{lambda,y} = p(lambda) rho_{lambda,y}, index lambda * m_b + y.
  std::vector<CMatrix> omega;

  const CMatrix& at(int lambda, int y) const { return omega[lambda * shape.m_b + y]; }
  /// sigma_{a|xy} = sum_lambda [lambda(x) = a] omega_{lambda,y}
  BwiAssemblage assemblage() const;
};

struct LhsBound {
  BoundResult result;
  LhsModel model;
};

LhsBound lhs_bound(const SteeringFunctional& f, const sdp::SolveOptions& opts = {});

struct LhsMembership {
  FeasibilityReport report;
  LhsModel model;  // present when feasible
};

LhsMembership lhs_membership(const BwiAssemblage& asm_,
                             double threshold = kMembershipThreshold,
                             const sdp::SolveOptions& opts = {});

struct NsBound {
  BoundResult result;
  BwiAssemblage optimizer;
};

NsBound ns_bound(const SteeringFunctional& f, const sdp::SolveOptions& opts = {});

/// Word bookkeeping for the moment matrix.
struct WordSet {
  int m_a = 1;
  int m_b = 1;

  int size() const { return 1 + m_a + m_b + m_a * m_b; }
  static constexpr int empty() { return 0; }
  int x(int x_) const { return 1 + x_; }
  int y(int y_) const { return 1 + m_a + y_; }
  int xy(int x_, int y_) const { return 1 + m_a + m_b + x_ * m_b + y_; }
  std::string label(int w) const;
};

struct MomentMatrix {
  WordSet words;
  int d = 2;
  CMatrix gamma;  // side d * words.size()

  CMatrix block(int u, int v) const {
    return gamma.block(static_cast<Eigen::Index>(u) * d, static_cast<Eigen::Index>(v) * d,
                       d, d);
  }
};

/// Residual of every moment-matrix condition family, plus "psd" (the most
/// negative eigenvalue, clipped at zero).
std::vector<ConstraintCheck> moment_residuals(const MomentMatrix& m, double tol = 1e-7);

/// The relaxation as a Hermitian program, kept with its bookkeeping so that
/// solutions can be read back.
struct QtildeProgram {
  sdp::HermitianBuilder builder;
  sdp::SdpProblem problem;
  WordSet words;
  int d = 2;
  int gamma = 0;                // block id of the moment matrix
  std::vector<int> complement;  // sigma_{1|xy} blocks, index x * m_b + y
  int equalities_raw = 0;
};

/// Throws InvalidInputError unless n_a = 2.
QtildeProgram build_qtilde_problem(const SteeringFunctional& f);

struct QtildeBound {
  BoundResult result;
  MomentMatrix moment;
  BwiAssemblage optimizer;
};

/// Lower bound on the quantum value of f. Throws SolverError unless the
/// solver reports an optimum.
QtildeBound qtilde_bound(const SteeringFunctional& f, const sdp::SolveOptions& opts = {});

/// Same program with the objective post-selected on y = a.
QtildeBound qtilde_instrumental_bound(const InstrumentalFunctional& f,
                                      const sdp::SolveOptions& opts = {});

struct QtildeMembership {
  FeasibilityReport report;
  MomentMatrix moment;  // present when feasible
};

/// Feasibility of the moment-matrix conditions with the linkage fixed to the
/// members of `asm_`. Infeasible certifies that asm_ is not quantum.
QtildeMembership qtilde_membership(const BwiAssemblage& asm_,
                                   double threshold = kMembershipThreshold,
                                   const sdp::SolveOptions& opts = {});

}  // namespace pqsteer
