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

#include <array>
#include <string>
#include <vector>

#include "pqsteer/assemblage.hpp"
#include "pqsteer/matcore.hpp"

namespace pqsteer {

enum class MapKind { Identity, Transpose, PauliAction };

const char* to_string(MapKind k);

/// sign * P_index with index 0..3 for I, X, Y, Z.
struct SignedPauli {
  int index = 0;
  int sign = 1;
};

/// Positive trace-preserving map. PauliAction maps act on qubits through a
/// real 4x4 transfer matrix T in the Pauli basis: Lambda[P_i] = sum_j T(j, i) P_j.
class LinearMapSpec {
 public:
  static LinearMapSpec identity();
  static LinearMapSpec transpose();
  /// images[i] is the image of P_i. images[0] must be +I.
  static LinearMapSpec pauli_action(const std::array<SignedPauli, 4>& images);
  /// General unital qubit map; the first row and column must be (1, 0, 0, 0).
  static LinearMapSpec from_transfer(const RMatrix& transfer);

  MapKind kind() const { return kind_; }
  /// Pauli transfer matrix; only meaningful for PauliAction.
  const RMatrix& transfer() const { return transfer_; }
  /// Largest singular value of the Bloch block (1 for Identity/Transpose).
  double bloch_norm() const;
  /// A unital qubit map is positive iff it maps the Bloch ball into itself.
  bool is_positive(double tol = 1e-12) const;

 private:
  MapKind kind_ = MapKind::Identity;
  RMatrix transfer_;
};

/// The map studied as the post-quantum witness: I, X, Z fixed and Y -> -Y.
LinearMapSpec y_flip_map();

CMatrix apply_map(const LinearMapSpec& spec, const CMatrix& m);

/// Heisenberg-picture map F with tr(N Lambda[M]) = tr(F[N] M).
CMatrix apply_dual(const LinearMapSpec& spec, const CMatrix& n);

std::vector<CMatrix> dual_povm(const LinearMapSpec& spec, const std::vector<CMatrix>& effects);

struct ChoiMatrix {
  CMatrix matrix;
  int map_dimension = 0;
  double min_eigenvalue() const;
  double trace() const;
};

/// sum_ij Lambda(|i><j|) (x) |i><j|, trace d for trace-preserving maps.
ChoiMatrix choi(const LinearMapSpec& spec, int d = 2);

/// Table p(a, b | x, y, z) with Bob's input split into the map label y and
/// the measurement label z.
class PtpTable {
 public:
  PtpTable(int n_a, int n_b, int m_x, int m_y, int m_z);
  double& operator()(int a, int b, int x, int y, int z) { return p_[index(a, b, x, y, z)]; }
  double operator()(int a, int b, int x, int y, int z) const { return p_[index(a, b, x, y, z)]; }
  int n_a() const { return n_a_; }
  int n_b() const { return n_b_; }
  int m_x() const { return m_x_; }
  int m_y() const { return m_y_; }
  int m_z() const { return m_z_; }
  const std::vector<double>& values() const { return p_; }
  /// max |sum_ab p - 1| over all inputs.
  double normalization_residual() const;

 private:
  int index(int a, int b, int x, int y, int z) const {
    return ((((x * m_y_ + y) * m_z_ + z) * n_a_ + a) * n_b_) + b;
  }
  int n_a_, n_b_, m_x_, m_y_, m_z_;
  std::vector<double> p_;
};

struct PtpModelSpec {
  CMatrix state;                     // on C^{d_A} (x) C^d
  int n_a = 2;
  std::vector<CMatrix> alice;        // M_{a|x}, index x * n_a + a
  std::vector<LinearMapSpec> maps;   // E^y
};

struct PtpBellModel {
  BwiAssemblage assemblage;          // sigma_{a|xy} = E^y(tr_A[(M_{a|x} (x) I) rho])
  PtpTable table;                    // tr(N_{b|z} sigma_{a|xy})
  PtpTable witness_table;            // tr((M_{a|x} (x) F^y(N_{b|z})) rho)
  std::vector<CMatrix> witness;      // F^y(N_{b|z}), index ((y * m_z + z) * n_b + b)
  double path_deviation = 0.0;
};

/// bob_effects[z] is a POVM; all must share one outcome count.
PtpBellModel ptp_bell_model(const PtpModelSpec& spec,
                            const std::vector<std::vector<CMatrix>>& bob_effects);

/// Maximally entangled two-qubit state with Pauli measurements and maps
/// {Identity, Transpose}. Reproduces pauli_transpose_assemblage.
PtpModelSpec pauli_transpose_model();

enum class LemmaStatus { PostQuantum, NoCertificate, Inconclusive };

const char* to_string(LemmaStatus s);

struct LemmaMap {
  int y = 0;
  RMatrix transfer;          // fitted Pauli transfer matrix
  double fit_residual = 0.0;
  double choi_min_eigenvalue = 0.0;
  bool completely_positive = true;
};

struct CertificateReport {
  LemmaStatus status = LemmaStatus::Inconclusive;
  int y_ref = 0;
  std::vector<LemmaMap> maps;
  std::string detail;
};

/// Fits, for every y != y_ref, the linear map carrying the pure reference
/// members onto the y members and inspects its Choi matrix. Only d = 2 with
/// full Pauli span is decided; anything else is reported as Inconclusive.
CertificateReport pure_state_lemma_check(const BwiAssemblage& asm_, int y_ref = 0,
                                         double tol = 1e-8);

}  // namespace pqsteer
