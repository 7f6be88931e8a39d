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

// Assemblages for the traditional, Bob-with-input (BWI), sequential and
// instrumental steering scenarios, with validators and canonical examples.
//
// Labels are 0-based everywhere. For the Pauli examples the measurement
// label x = 0, 1, 2 stands for the Pauli operator X, Y, Z (i.e. the usual
// 1-based Pauli index minus one).

#include <cstdint>
#include <string>
#include <vector>

#include "pqsteer/matcore.hpp"
#include "pqsteer/sdp.hpp"

namespace pqsteer {

inline constexpr double kValidationTol = 1e-9;

enum class ScenarioKind { Traditional, BobWithInput, Sequential, Instrumental };

const char* to_string(ScenarioKind k);

struct ScenarioShape {
  int n_a = 2;  // Alice outcomes
  int m_a = 1;  // Alice inputs
  int m_b = 1;  // Bob inputs (1 for traditional)
  int d = 2;    // Bob's Hilbert-space dimension
  ScenarioKind kind = ScenarioKind::BobWithInput;

  /// Throws InvalidInputError when a count is < 1.
  void check() const;
  int member_count() const { return n_a * m_a * m_b; }
  bool operator==(const ScenarioShape&) const = default;
};

struct SequentialShape {
  int n_a1 = 2;
  int m_x1 = 2;
  int n_a2 = 2;
  int m_x2 = 2;
  int d = 2;

  void check() const;
  int member_count() const { return n_a1 * m_x1 * n_a2 * m_x2; }
  bool operator==(const SequentialShape&) const = default;
};

/// Family sigma_{a|xy}. A traditional assemblage is the m_b == 1 case.
class BwiAssemblage {
 public:
  BwiAssemblage() = default;
  /// Zero-initialised members.
  explicit BwiAssemblage(ScenarioShape shape);
  /// Throws DimensionError unless members has n_a*m_a*m_b entries of side d.
  BwiAssemblage(ScenarioShape shape, std::vector<CMatrix> members);

  const ScenarioShape& shape() const { return shape_; }
  const CMatrix& at(int a, int x, int y = 0) const { return members_[index(a, x, y)]; }
  CMatrix& at(int a, int x, int y = 0) { return members_[index(a, x, y)]; }
  const std::vector<CMatrix>& members() const { return members_; }

  /// sum_a sigma_{a|xy}
  CMatrix reduced(int x, int y = 0) const;
  /// p(a|x) read at Bob input y.
  double probability(int a, int x, int y = 0) const;

  int index(int a, int x, int y) const;

  bool operator==(const BwiAssemblage& o) const;

 private:
  ScenarioShape shape_;
  std::vector<CMatrix> members_;
};

using TraditionalAssemblage = BwiAssemblage;

/// Family sigma_{a1 a2|x1 x2}.
class SequentialAssemblage {
 public:
  SequentialAssemblage() = default;
  explicit SequentialAssemblage(SequentialShape shape);
  SequentialAssemblage(SequentialShape shape, std::vector<CMatrix> members);

  const SequentialShape& shape() const { return shape_; }
  const CMatrix& at(int a1, int a2, int x1, int x2) const {
    return members_[index(a1, a2, x1, x2)];
  }
  CMatrix& at(int a1, int a2, int x1, int x2) {
    return members_[index(a1, a2, x1, x2)];
  }
  const std::vector<CMatrix>& members() const { return members_; }

  /// First-stage marginal sum_{a2} sigma_{a1 a2|x1 x2}.
  CMatrix first_stage(int a1, int x1, int x2 = 0) const;
  /// sum_{a1 a2} sigma_{a1 a2|x1 x2}
  CMatrix reduced(int x1 = 0, int x2 = 0) const;

  int index(int a1, int a2, int x1, int x2) const;
  bool operator==(const SequentialAssemblage& o) const;

 private:
  SequentialShape shape_;
  std::vector<CMatrix> members_;
};

/// Family sigma_{a|x}; Bob's input is Alice's outcome.
class InstrumentalAssemblage {
 public:
  InstrumentalAssemblage() = default;
  explicit InstrumentalAssemblage(ScenarioShape shape);
  InstrumentalAssemblage(ScenarioShape shape, std::vector<CMatrix> members);

  const ScenarioShape& shape() const { return shape_; }
  const CMatrix& at(int a, int x) const { return members_[index(a, x)]; }
  CMatrix& at(int a, int x) { return members_[index(a, x)]; }
  const std::vector<CMatrix>& members() const { return members_; }
  int index(int a, int x) const;
  bool operator==(const InstrumentalAssemblage& o) const;

 private:
  ScenarioShape shape_;
  std::vector<CMatrix> members_;
};

struct ConstraintCheck {
  std::string name;
  double residual = 0.0;
  bool passed = true;
};

struct ValidationReport {
  bool passed = true;
  double tol = kValidationTol;
  std::vector<ConstraintCheck> checks;

  double residual(const std::string& name) const;
  /// Names of failed checks, comma separated.
  std::string failures() const;
};

/// Non-signalling conditions for BWI assemblages: positivity, x-independence
/// of sum_a sigma_{a|xy}, y-independence of tr sigma_{a|xy} and unit total
/// trace.
ValidationReport validate_ns_bwi(const BwiAssemblage& asm_, double tol = kValidationTol);

/// Positivity, (x1,x2)-independence of the total, and x2-independence of
/// the first-stage marginals.
ValidationReport validate_ns_sequential(const SequentialAssemblage& asm_,
                                        double tol = kValidationTol);

/// Positivity and unit total trace per x.
ValidationReport validate_instrumental(const InstrumentalAssemblage& asm_,
                                       double tol = kValidationTol);

/// Verdict of an SDP membership test. `margin` is the smallest uniform
/// eigenvalue shift that makes the defining constraints satisfiable:
/// zero (within `threshold`) means feasible.
struct FeasibilityReport {
  bool feasible = false;
  sdp::Status status = sdp::Status::NumericalTrouble;
  double margin = 0.0;
  double threshold = 0.0;
  int iterations = 0;
  std::string detail;
};

inline constexpr double kMembershipThreshold = 1e-6;

struct InstrumentalMembership {
  FeasibilityReport report;
  /// NS BWI extension omega_{a|xy} (present when feasible).
  BwiAssemblage extension;
};

/// Adds the non-signalling conditions on Hermitian blocks holding the
/// members of a BWI assemblage (block ids laid out like the members).
void add_ns_bwi_constraints(sdp::HermitianBuilder& hb, const std::vector<int>& blocks,
                            const ScenarioShape& shape);

/// Searches for a non-signalling BWI assemblage omega with
/// omega_{a|x,y=a} = sigma_{a|x}.
InstrumentalMembership instrumental_membership(
    const InstrumentalAssemblage& asm_, double threshold = kMembershipThreshold,
    const sdp::SolveOptions& opts = {});

/// sigma_{a|xy} = (|a><a| [xy = 0] + |a+1><a+1| [xy = 1]) / 2 on a qubit.
BwiAssemblage pr_box_assemblage();

/// sigma_{a|xy} = (I + (-1)^{a + [x = Y][y = 1]} P_x) / 4 with P = (X, Y, Z);
/// the y = 1 members are the transposes of the y = 0 members. Construction
/// cross-checks this closed form against the member-by-member listing.
BwiAssemblage pauli_transpose_assemblage();

/// Member-by-member listing of the same assemblage (pure-state kets for
/// y = 0, transposes for y = 1). Exposed for the construction cross-check.
BwiAssemblage pauli_transpose_listing();

/// sigma_{a|x} = omega_{a|x, y=a}. Requires m_b >= n_a and NS validity.
InstrumentalAssemblage instrumental_from_bwi(const BwiAssemblage& asm_,
                                             double tol = kValidationTol);

/// Probability table p(a,b|x,y) = tr(N_b sigma_{a|xy}).
class BellTable {
 public:
  BellTable(int n_a, int n_b, int m_a, int m_b);
  double& operator()(int a, int b, int x, int y) { return p_[index(a, b, x, y)]; }
  double operator()(int a, int b, int x, int y) const { return p_[index(a, b, x, y)]; }
  int n_a() const { return n_a_; }
  int n_b() const { return n_b_; }
  int m_a() const { return m_a_; }
  int m_b() const { return m_b_; }
  const std::vector<double>& values() const { return p_; }

 private:
  int index(int a, int b, int x, int y) const {
    return ((x * m_b_ + y) * n_a_ + a) * n_b_ + b;
  }
  int n_a_, n_b_, m_a_, m_b_;
  std::vector<double> p_;
};

/// Throws InvalidInputError unless the effects are PSD and sum to I.
void check_povm(const std::vector<CMatrix>& effects, double tol = kValidationTol);

BellTable bell_correlations(const BwiAssemblage& asm_, const std::vector<CMatrix>& povm);

/// E00 + E01 + E10 - E11 for a binary table.
double chsh_value(const BellTable& p);

/// Haar-random unitary of side n (QR of a complex Ginibre matrix).
CMatrix random_unitary(int n, std::uint64_t seed);

/// Quantum BWI assemblage: random pure state on C^{dA} (x) C^d with
/// dA = max(d, n_a), random projective measurements for Alice, and random
/// channels for Bob from unitary dilations with a d-dimensional ancilla.
BwiAssemblage random_quantum_bwi(const ScenarioShape& shape, std::uint64_t seed);

/// Random non-signalling traditional assemblage with prescribed reduced
/// state: random PSD members rescaled so that each input sums exactly to
/// `reduced`.
BwiAssemblage random_ns_traditional(int n_a, int m_a, const CMatrix& reduced,
                                    std::uint64_t seed);

/// Random full-rank state of dimension d.
CMatrix random_density_matrix(int d, std::uint64_t seed);

/// Random NS sequential assemblage built stage by stage.
SequentialAssemblage random_ns_sequential(const SequentialShape& shape,
                                          std::uint64_t seed);

/// Quantum sequential assemblage from a random state, random Kraus
/// instruments (first stage) and random projective measurements.
SequentialAssemblage random_quantum_sequential(const SequentialShape& shape,
                                               std::uint64_t seed);

}  // namespace pqsteer
