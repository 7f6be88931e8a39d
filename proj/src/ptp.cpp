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

#include "pqsteer/ptp.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "pqsteer/error.hpp"

namespace pqsteer {

namespace {

constexpr double kTransferTol = 1e-9;

RVector pauli_vector(const CMatrix& m) {
  RVector v(4);
  for (int i = 0; i < 4; ++i) v(i) = trace_product(pauli::by_index(i), m);
  return v;
}

CMatrix from_pauli_vector(const Eigen::VectorXcd& v) {
  CMatrix out = CMatrix::Zero(2, 2);
  for (int i = 0; i < 4; ++i) out += 0.5 * v(i) * pauli::by_index(i);
  return out;
}

Eigen::VectorXcd pauli_coeffs(const CMatrix& m) {
  Eigen::VectorXcd v(4);
  for (int i = 0; i < 4; ++i) v(i) = (pauli::by_index(i) * m).trace();
  return v;
}

void require_qubit(const CMatrix& m, const char* who) {
  if (m.rows() != 2 || m.cols() != 2) {
    throw DimensionError(std::string(who) + ": Pauli actions need a 2x2 operand");
  }
}

void require_square(const CMatrix& m, const char* who) {
  if (m.rows() != m.cols()) throw DimensionError(std::string(who) + ": operand not square");
}

}  // namespace

const char* to_string(MapKind k) {
  switch (k) {
    case MapKind::Identity: return "identity";
    case MapKind::Transpose: return "transpose";
    case MapKind::PauliAction: return "pauli-action";
  }
  return "?";
}

const char* to_string(LemmaStatus s) {
  switch (s) {
    case LemmaStatus::PostQuantum: return "post-quantum";
    case LemmaStatus::NoCertificate: return "no-certificate";
    case LemmaStatus::Inconclusive: return "inconclusive";
  }
  return "?";
}

LinearMapSpec LinearMapSpec::identity() {
  LinearMapSpec s;
  s.kind_ = MapKind::Identity;
  s.transfer_ = RMatrix::Identity(4, 4);
  return s;
}

LinearMapSpec LinearMapSpec::transpose() {
  LinearMapSpec s;
  s.kind_ = MapKind::Transpose;
  s.transfer_ = RMatrix::Identity(4, 4);
  s.transfer_(2, 2) = -1.0;
  return s;
}

LinearMapSpec LinearMapSpec::pauli_action(const std::array<SignedPauli, 4>& images) {
  if (images[0].index != 0 || images[0].sign != 1) {
    throw InvalidInputError("pauli_action: the identity must map to +I");
  }
  RMatrix t = RMatrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) {
    const SignedPauli& p = images[i];
    if (p.index < 0 || p.index > 3 || (p.sign != 1 && p.sign != -1)) {
      throw InvalidInputError("pauli_action: image must be +/- one of I, X, Y, Z");
    }
    t(p.index, i) = p.sign;
  }
  return from_transfer(t);
}

LinearMapSpec LinearMapSpec::from_transfer(const RMatrix& t) {
  if (t.rows() != 4 || t.cols() != 4) throw DimensionError("transfer matrix must be 4x4");
  if (std::abs(t(0, 0) - 1.0) > kTransferTol || t.row(0).tail(3).cwiseAbs().maxCoeff() > kTransferTol) {
    throw InvalidInputError("transfer matrix is not trace preserving");
  }
  LinearMapSpec s;
  s.kind_ = MapKind::PauliAction;
  s.transfer_ = t;
  return s;
}

double LinearMapSpec::bloch_norm() const {
  if (kind_ != MapKind::PauliAction) return 1.0;
  Eigen::JacobiSVD<RMatrix> svd(transfer_.block(1, 1, 3, 3));
  return svd.singularValues()(0);
}

bool LinearMapSpec::is_positive(double tol) const {
  if (kind_ != MapKind::PauliAction) return true;
  const Eigen::Vector3d shift = transfer_.block(1, 0, 3, 1);
  if (shift.norm() <= kTransferTol) return bloch_norm() <= 1.0 + tol;
  // Non-unital: scan the Bloch sphere. Coarse but adequate for the
  // qubit maps handled here.
  const RMatrix lin = transfer_.block(1, 1, 3, 3);
  const int n = 180;
  double worst = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double th = M_PI * i / n;
    for (int j = 0; j < 2 * n; ++j) {
      const double ph = M_PI * j / n;
      const Eigen::Vector3d r(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
      worst = std::max(worst, (shift + lin * r).norm());
    }
  }
  return worst <= 1.0 + std::max(tol, 1e-6);
}

LinearMapSpec y_flip_map() {
  return LinearMapSpec::pauli_action({SignedPauli{0, 1}, SignedPauli{1, 1},
                                      SignedPauli{2, -1}, SignedPauli{3, 1}});
}

CMatrix apply_map(const LinearMapSpec& spec, const CMatrix& m) {
  switch (spec.kind()) {
    case MapKind::Identity:
      require_square(m, "apply_map");
      return m;
    case MapKind::Transpose:
      require_square(m, "apply_map");
      return m.transpose();
    case MapKind::PauliAction:
      require_qubit(m, "apply_map");
      return from_pauli_vector(spec.transfer().cast<Complex>() * pauli_coeffs(m));
  }
  return m;
}

CMatrix apply_dual(const LinearMapSpec& spec, const CMatrix& n) {
  switch (spec.kind()) {
    case MapKind::Identity:
      require_square(n, "apply_dual");
      return n;
    case MapKind::Transpose:
      require_square(n, "apply_dual");
      return n.transpose();
    case MapKind::PauliAction:
      require_qubit(n, "apply_dual");
      return from_pauli_vector(spec.transfer().transpose().cast<Complex>() * pauli_coeffs(n));
  }
  return n;
}

std::vector<CMatrix> dual_povm(const LinearMapSpec& spec, const std::vector<CMatrix>& effects) {
  check_povm(effects);
  if (!spec.is_positive()) throw InvalidInputError("dual_povm: map is not positive");
  std::vector<CMatrix> out;
  out.reserve(effects.size());
  for (const CMatrix& e : effects) out.push_back(hermitian_part(apply_dual(spec, e)));
  check_povm(out);
  return out;
}

double ChoiMatrix::min_eigenvalue() const { return pqsteer::min_eigenvalue(matrix); }

double ChoiMatrix::trace() const { return matrix.trace().real(); }

ChoiMatrix choi(const LinearMapSpec& spec, int d) {
  if (d < 1) throw DimensionError("choi: dimension must be positive");
  if (spec.kind() == MapKind::PauliAction && d != 2) {
    throw DimensionError("choi: Pauli actions are qubit maps");
  }
  ChoiMatrix c;
  c.map_dimension = d;
  c.matrix = CMatrix::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      CMatrix e = CMatrix::Zero(d, d);
      e(i, j) = 1.0;
      c.matrix += kron(apply_map(spec, e), e);
    }
  return c;
}

PtpTable::PtpTable(int n_a, int n_b, int m_x, int m_y, int m_z)
    : n_a_(n_a), n_b_(n_b), m_x_(m_x), m_y_(m_y), m_z_(m_z),
      p_(static_cast<std::size_t>(n_a) * n_b * m_x * m_y * m_z, 0.0) {}

double PtpTable::normalization_residual() const {
  double worst = 0.0;
  for (int x = 0; x < m_x_; ++x)
    for (int y = 0; y < m_y_; ++y)
      for (int z = 0; z < m_z_; ++z) {
        double s = 0.0;
        for (int a = 0; a < n_a_; ++a)
          for (int b = 0; b < n_b_; ++b) s += (*this)(a, b, x, y, z);
        worst = std::max(worst, std::abs(s - 1.0));
      }
  return worst;
}

PtpBellModel ptp_bell_model(const PtpModelSpec& spec,
                            const std::vector<std::vector<CMatrix>>& bob_effects) {
  if (bob_effects.empty() || spec.maps.empty() || spec.n_a < 1) {
    throw InvalidInputError("ptp_bell_model: empty input family");
  }
  const int n_b = static_cast<int>(bob_effects.front().size());
  const int d = static_cast<int>(bob_effects.front().front().rows());
  for (const auto& povm : bob_effects) {
    if (static_cast<int>(povm.size()) != n_b) {
      throw InvalidInputError("ptp_bell_model: Bob's POVMs differ in outcome count");
    }
    check_povm(povm);
    if (povm.front().rows() != d) throw DimensionError("ptp_bell_model: Bob's POVMs differ in dimension");
  }
  if (spec.state.rows() % d != 0 || spec.state.rows() != spec.state.cols()) {
    throw DimensionError("ptp_bell_model: state does not factor as d_A x d");
  }
  if (!is_psd(spec.state, 1e-9) || std::abs(spec.state.trace().real() - 1.0) > 1e-9) {
    throw InvalidInputError("ptp_bell_model: state is not a density matrix");
  }
  const int d_a = static_cast<int>(spec.state.rows()) / d;
  if (spec.alice.empty() || spec.alice.size() % spec.n_a != 0) {
    throw InvalidInputError("ptp_bell_model: Alice's effects do not split into POVMs");
  }
  const int m_x = static_cast<int>(spec.alice.size()) / spec.n_a;
  for (int x = 0; x < m_x; ++x) {
    const std::vector<CMatrix> povm(spec.alice.begin() + x * spec.n_a,
                                    spec.alice.begin() + (x + 1) * spec.n_a);
    if (povm.front().rows() != d_a) throw DimensionError("ptp_bell_model: Alice's effects have the wrong side");
    check_povm(povm);
  }
  for (const LinearMapSpec& m : spec.maps) {
    if (!m.is_positive()) throw InvalidInputError("ptp_bell_model: map is not positive");
    if (m.kind() == MapKind::PauliAction && d != 2) {
      throw DimensionError("ptp_bell_model: Pauli actions need d = 2");
    }
  }
  const int m_y = static_cast<int>(spec.maps.size());
  const int m_z = static_cast<int>(bob_effects.size());

  BwiAssemblage asm_({spec.n_a, m_x, m_y, d, ScenarioKind::BobWithInput});
  const CMatrix id_b = CMatrix::Identity(d, d);
  for (int x = 0; x < m_x; ++x)
    for (int a = 0; a < spec.n_a; ++a) {
      const CMatrix& ma = spec.alice[x * spec.n_a + a];
      const CMatrix steered =
          hermitian_part(partial_trace(kron(ma, id_b) * spec.state, {d_a, d}, Subsystem::B));
      for (int y = 0; y < m_y; ++y) asm_.at(a, x, y) = hermitian_part(apply_map(spec.maps[y], steered));
    }

  PtpBellModel out{asm_, PtpTable(spec.n_a, n_b, m_x, m_y, m_z),
                   PtpTable(spec.n_a, n_b, m_x, m_y, m_z), {}, 0.0};
  for (int y = 0; y < m_y; ++y)
    for (int z = 0; z < m_z; ++z)
      for (int b = 0; b < n_b; ++b)
        out.witness.push_back(hermitian_part(apply_dual(spec.maps[y], bob_effects[z][b])));

  for (int x = 0; x < m_x; ++x)
    for (int y = 0; y < m_y; ++y)
      for (int z = 0; z < m_z; ++z)
        for (int a = 0; a < spec.n_a; ++a)
          for (int b = 0; b < n_b; ++b) {
            const double direct = trace_product(bob_effects[z][b], asm_.at(a, x, y));
            const CMatrix joint = kron(spec.alice[x * spec.n_a + a], out.witness[(y * m_z + z) * n_b + b]);
            const double dual = trace_product(joint, spec.state);
            out.table(a, b, x, y, z) = direct;
            out.witness_table(a, b, x, y, z) = dual;
            out.path_deviation = std::max(out.path_deviation, std::abs(direct - dual));
          }
  return out;
}

PtpModelSpec pauli_transpose_model() {
  PtpModelSpec s;
  CVector phi = CVector::Zero(4);
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  s.state = outer(phi);
  s.n_a = 2;
  // tr_A[(M (x) I) Phi+] = M^T / 2, hence the transposed Paulis here.
  for (int x = 0; x < 3; ++x)
    for (int a = 0; a < 2; ++a) {
      const double sgn = a == 0 ? 1.0 : -1.0;
      s.alice.push_back(0.5 * (pauli::I() + sgn * pauli::by_index(x + 1).transpose()));
    }
  s.maps = {LinearMapSpec::identity(), LinearMapSpec::transpose()};
  return s;
}

CertificateReport pure_state_lemma_check(const BwiAssemblage& s, int y_ref, double tol) {
  const ScenarioShape& sh = s.shape();
  CertificateReport rep;
  rep.y_ref = y_ref;
  if (y_ref < 0 || y_ref >= sh.m_b) throw InvalidInputError("pure_state_lemma_check: y_ref out of range");
  if (sh.d != 2) {
    rep.detail = "only d = 2 is decided";
    return rep;
  }

  std::vector<RVector> ref;
  std::vector<std::pair<int, int>> used;
  for (int x = 0; x < sh.m_a; ++x)
    for (int a = 0; a < sh.n_a; ++a) {
      const CMatrix& m = s.at(a, x, y_ref);
      const double tr = m.trace().real();
      if (tr <= tol) continue;
      const RVector ev = eigvalsh(m);
      if (ev(0) > tol * tr) {
        std::ostringstream os;
        os << "pure_state_lemma_check: reference member a=" << a << " x=" << x << " is not pure";
        throw InvalidInputError(os.str());
      }
      ref.push_back(pauli_vector(m));
      used.emplace_back(a, x);
    }
  RMatrix src(4, static_cast<Eigen::Index>(ref.size()));
  for (std::size_t k = 0; k < ref.size(); ++k) src.col(k) = ref[k];
  Eigen::JacobiSVD<RMatrix> svd(src.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-9);
  if (ref.empty() || svd.rank() < 4) {
    rep.detail = "reference members do not span the qubit operators";
    return rep;
  }

  bool any_cert = false, any_open = false;
  for (int y = 0; y < sh.m_b; ++y) {
    if (y == y_ref) continue;
    RMatrix dst(4, src.cols());
    for (std::size_t k = 0; k < used.size(); ++k) dst.col(k) = pauli_vector(s.at(used[k].first, used[k].second, y));
    LemmaMap lm;
    lm.y = y;
    lm.transfer = svd.solve(dst.transpose()).transpose();
    lm.fit_residual = (lm.transfer * src - dst).cwiseAbs().maxCoeff();
    if (lm.fit_residual > 1e-7) {
      any_open = true;
      rep.maps.push_back(lm);
      continue;
    }
    CMatrix c = CMatrix::Zero(4, 4);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        CMatrix e = CMatrix::Zero(2, 2);
        e(i, j) = 1.0;
        c += kron(from_pauli_vector(lm.transfer.cast<Complex>() * pauli_coeffs(e)), e);
      }
    lm.choi_min_eigenvalue = min_eigenvalue(hermitian_part(c));
    lm.completely_positive = lm.choi_min_eigenvalue >= -tol;
    any_cert = any_cert || !lm.completely_positive;
    rep.maps.push_back(lm);
  }
  if (any_cert) {
    rep.status = LemmaStatus::PostQuantum;
    rep.detail = "fitted map has a negative Choi eigenvalue";
  } else if (any_open) {
    rep.status = LemmaStatus::Inconclusive;
    rep.detail = "no linear map fits the members";
  } else {
    rep.status = LemmaStatus::NoCertificate;
    rep.detail = "every fitted map is completely positive";
  }
  return rep;
}

}  // namespace pqsteer
