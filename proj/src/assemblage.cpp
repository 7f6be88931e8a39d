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

#include "pqsteer/assemblage.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "pqsteer/error.hpp"

namespace pqsteer {

const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Traditional: return "traditional";
    case ScenarioKind::BobWithInput: return "bwi";
    case ScenarioKind::Sequential: return "sequential";
    case ScenarioKind::Instrumental: return "instrumental";
  }
  return "?";
}

void ScenarioShape::check() const {
  if (n_a < 1 || m_a < 1 || m_b < 1 || d < 1) {
    throw InvalidInputError("scenario counts must all be >= 1");
  }
  if (kind == ScenarioKind::Traditional && m_b != 1) {
    throw InvalidInputError("traditional scenario requires m_b = 1");
  }
}

void SequentialShape::check() const {
  if (n_a1 < 1 || m_x1 < 1 || n_a2 < 1 || m_x2 < 1 || d < 1) {
    throw InvalidInputError("sequential scenario counts must all be >= 1");
  }
}

namespace {

void check_members(const std::vector<CMatrix>& members, std::size_t count, int d,
                   const char* what) {
  if (members.size() != count) {
    std::ostringstream os;
    os << what << ": expected " << count << " members, got " << members.size();
    throw DimensionError(os.str());
  }
  for (const CMatrix& m : members) {
    if (m.rows() != d || m.cols() != d) {
      std::ostringstream os;
      os << what << ": member of shape " << m.rows() << "x" << m.cols()
         << " but d = " << d;
      throw DimensionError(os.str());
    }
  }
}

void check_range(int v, int n, const char* label) {
  if (v < 0 || v >= n) {
    std::ostringstream os;
    os << "label " << label << " = " << v << " outside [0, " << n << ")";
    throw DimensionError(os.str());
  }
}

std::vector<CMatrix> zero_members(std::size_t count, int d) {
  return std::vector<CMatrix>(count, CMatrix::Zero(d, d));
}

bool members_equal(const std::vector<CMatrix>& a, const std::vector<CMatrix>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols() || a[i] != b[i]) {
      return false;
    }
  }
  return true;
}

}  // namespace

// --- BwiAssemblage -----------------------------------------------------------

BwiAssemblage::BwiAssemblage(ScenarioShape shape) : shape_(shape) {
  shape_.check();
  members_ = zero_members(shape_.member_count(), shape_.d);
}

BwiAssemblage::BwiAssemblage(ScenarioShape shape, std::vector<CMatrix> members)
    : shape_(shape), members_(std::move(members)) {
  shape_.check();
  check_members(members_, shape_.member_count(), shape_.d, "BwiAssemblage");
}

int BwiAssemblage::index(int a, int x, int y) const {
  check_range(a, shape_.n_a, "a");
  check_range(x, shape_.m_a, "x");
  check_range(y, shape_.m_b, "y");
  return (x * shape_.m_b + y) * shape_.n_a + a;
}

CMatrix BwiAssemblage::reduced(int x, int y) const {
  CMatrix out = CMatrix::Zero(shape_.d, shape_.d);
  for (int a = 0; a < shape_.n_a; ++a) out += at(a, x, y);
  return out;
}

double BwiAssemblage::probability(int a, int x, int y) const {
  return at(a, x, y).trace().real();
}

bool BwiAssemblage::operator==(const BwiAssemblage& o) const {
  return shape_ == o.shape_ && members_equal(members_, o.members_);
}

// --- SequentialAssemblage ----------------------------------------------------

SequentialAssemblage::SequentialAssemblage(SequentialShape shape) : shape_(shape) {
  shape_.check();
  members_ = zero_members(shape_.member_count(), shape_.d);
}

SequentialAssemblage::SequentialAssemblage(SequentialShape shape,
                                           std::vector<CMatrix> members)
    : shape_(shape), members_(std::move(members)) {
  shape_.check();
  check_members(members_, shape_.member_count(), shape_.d, "SequentialAssemblage");
}

int SequentialAssemblage::index(int a1, int a2, int x1, int x2) const {
  check_range(a1, shape_.n_a1, "a1");
  check_range(a2, shape_.n_a2, "a2");
  check_range(x1, shape_.m_x1, "x1");
  check_range(x2, shape_.m_x2, "x2");
  return ((x1 * shape_.m_x2 + x2) * shape_.n_a1 + a1) * shape_.n_a2 + a2;
}

CMatrix SequentialAssemblage::first_stage(int a1, int x1, int x2) const {
  CMatrix out = CMatrix::Zero(shape_.d, shape_.d);
  for (int a2 = 0; a2 < shape_.n_a2; ++a2) out += at(a1, a2, x1, x2);
  return out;
}

CMatrix SequentialAssemblage::reduced(int x1, int x2) const {
  CMatrix out = CMatrix::Zero(shape_.d, shape_.d);
  for (int a1 = 0; a1 < shape_.n_a1; ++a1) out += first_stage(a1, x1, x2);
  return out;
}

bool SequentialAssemblage::operator==(const SequentialAssemblage& o) const {
  return shape_ == o.shape_ && members_equal(members_, o.members_);
}

// --- InstrumentalAssemblage --------------------------------------------------

InstrumentalAssemblage::InstrumentalAssemblage(ScenarioShape shape) : shape_(shape) {
  shape_.kind = ScenarioKind::Instrumental;
  shape_.m_b = shape_.n_a;
  shape_.check();
  members_ = zero_members(static_cast<std::size_t>(shape_.n_a) * shape_.m_a, shape_.d);
}

InstrumentalAssemblage::InstrumentalAssemblage(ScenarioShape shape,
                                               std::vector<CMatrix> members)
    : shape_(shape), members_(std::move(members)) {
  shape_.kind = ScenarioKind::Instrumental;
  shape_.m_b = shape_.n_a;
  shape_.check();
  check_members(members_, static_cast<std::size_t>(shape_.n_a) * shape_.m_a, shape_.d,
                "InstrumentalAssemblage");
}

int InstrumentalAssemblage::index(int a, int x) const {
  check_range(a, shape_.n_a, "a");
  check_range(x, shape_.m_a, "x");
  return x * shape_.n_a + a;
}

bool InstrumentalAssemblage::operator==(const InstrumentalAssemblage& o) const {
  return shape_ == o.shape_ && members_equal(members_, o.members_);
}

// --- Validation --------------------------------------------------------------

double ValidationReport::residual(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c.residual;
  throw InvalidInputError("no check named " + name);
}

std::string ValidationReport::failures() const {
  std::string out;
  for (const auto& c : checks) {
    if (c.passed) continue;
    if (!out.empty()) out += ", ";
    out += c.name;
  }
  return out;
}

namespace {

// Distance from the PSD cone as seen by the validator: the Hermiticity
// defect or the magnitude of the most negative eigenvalue.
double psd_residual(const CMatrix& m) {
  const double herm = hermitian_deviation(m);
  if (herm > kHermitianTol * std::max(1.0, max_abs(m))) return herm;
  return std::max(0.0, -min_eigenvalue(m));
}

void add_check(ValidationReport& r, std::string name, double residual) {
  const bool ok = residual <= r.tol;
  r.checks.push_back({std::move(name), residual, ok});
  r.passed = r.passed && ok;
}

}  // namespace

ValidationReport validate_ns_bwi(const BwiAssemblage& s, double tol) {
  ValidationReport r;
  r.tol = tol;
  const auto& sh = s.shape();
  double psd = 0.0, xm = 0.0, yt = 0.0, norm = 0.0;
  for (const CMatrix& m : s.members()) psd = std::max(psd, psd_residual(m));
  for (int y = 0; y < sh.m_b; ++y) {
    const CMatrix ref = s.reduced(0, y);
    for (int x = 0; x < sh.m_a; ++x) {
      const CMatrix red = s.reduced(x, y);
      xm = std::max(xm, max_abs(red - ref));
      norm = std::max(norm, std::abs(red.trace() - Complex(1.0)));
    }
  }
  for (int x = 0; x < sh.m_a; ++x) {
    for (int a = 0; a < sh.n_a; ++a) {
      const Complex t0 = s.at(a, x, 0).trace();
      for (int y = 1; y < sh.m_b; ++y) {
        yt = std::max(yt, std::abs(s.at(a, x, y).trace() - t0));
      }
    }
  }
  add_check(r, "psd", psd);
  add_check(r, "x_marginal", xm);
  add_check(r, "y_trace", yt);
  add_check(r, "normalization", norm);
  return r;
}

ValidationReport validate_ns_sequential(const SequentialAssemblage& s, double tol) {
  ValidationReport r;
  r.tol = tol;
  const auto& sh = s.shape();
  double psd = 0.0, total = 0.0, stage = 0.0, norm = 0.0;
  for (const CMatrix& m : s.members()) psd = std::max(psd, psd_residual(m));
  const CMatrix ref = s.reduced(0, 0);
  for (int x1 = 0; x1 < sh.m_x1; ++x1) {
    for (int x2 = 0; x2 < sh.m_x2; ++x2) {
      const CMatrix red = s.reduced(x1, x2);
      total = std::max(total, max_abs(red - ref));
      norm = std::max(norm, std::abs(red.trace() - Complex(1.0)));
    }
    for (int a1 = 0; a1 < sh.n_a1; ++a1) {
      const CMatrix first = s.first_stage(a1, x1, 0);
      for (int x2 = 1; x2 < sh.m_x2; ++x2) {
        stage = std::max(stage, max_abs(s.first_stage(a1, x1, x2) - first));
      }
    }
  }
  add_check(r, "psd", psd);
  add_check(r, "total_marginal", total);
  add_check(r, "first_stage_marginal", stage);
  add_check(r, "normalization", norm);
  return r;
}

ValidationReport validate_instrumental(const InstrumentalAssemblage& s, double tol) {
  ValidationReport r;
  r.tol = tol;
  double psd = 0.0, norm = 0.0;
  for (const CMatrix& m : s.members()) psd = std::max(psd, psd_residual(m));
  for (int x = 0; x < s.shape().m_a; ++x) {
    Complex t = 0.0;
    for (int a = 0; a < s.shape().n_a; ++a) t += s.at(a, x).trace();
    norm = std::max(norm, std::abs(t - Complex(1.0)));
  }
  add_check(r, "psd", psd);
  add_check(r, "normalization", norm);
  return r;
}

// --- Canonical assemblages ---------------------------------------------------

BwiAssemblage pr_box_assemblage() {
  BwiAssemblage s({2, 2, 2, 2, ScenarioKind::BobWithInput});
  for (int a = 0; a < 2; ++a) {
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) {
        const int flip = x * y;
        s.at(a, x, y) = 0.5 * basis_projector(2, a ^ flip);
      }
    }
  }
  return s;
}

BwiAssemblage pauli_transpose_listing() {
  BwiAssemblage s({2, 3, 2, 2, ScenarioKind::BobWithInput});
  const double r2 = 1.0 / std::sqrt(2.0);
  const Complex i(0.0, 1.0);
  for (int a = 0; a < 2; ++a) {
    const double sgn = a == 0 ? 1.0 : -1.0;
    CVector plus(2), plus_i(2);
    plus << r2, sgn * r2;        // (|0> + (-1)^a |1>)/sqrt2
    plus_i << r2, sgn * i * r2;  // (|0> + (-1)^a i|1>)/sqrt2
    s.at(a, 0, 0) = 0.5 * outer(plus);
    s.at(a, 1, 0) = 0.5 * outer(plus_i);
    s.at(a, 2, 0) = 0.5 * basis_projector(2, a);
    for (int x = 0; x < 3; ++x) s.at(a, x, 1) = s.at(a, x, 0).transpose();
  }
  return s;
}

BwiAssemblage pauli_transpose_assemblage() {
  BwiAssemblage s({2, 3, 2, 2, ScenarioKind::BobWithInput});
  for (int a = 0; a < 2; ++a) {
    for (int x = 0; x < 3; ++x) {
      for (int y = 0; y < 2; ++y) {
        const int exponent = a + ((x == 1 && y == 1) ? 1 : 0);
        const double sgn = exponent % 2 == 0 ? 1.0 : -1.0;
        s.at(a, x, y) = 0.25 * (pauli::I() + sgn * pauli::by_index(x + 1));
      }
    }
  }
  const BwiAssemblage listing = pauli_transpose_listing();
  for (std::size_t k = 0; k < s.members().size(); ++k) {
    if (max_abs(s.members()[k] - listing.members()[k]) > 1e-15) {
      throw InvalidInputError(
          "pauli_transpose_assemblage: closed form and listing disagree");
    }
  }
  return s;
}

InstrumentalAssemblage instrumental_from_bwi(const BwiAssemblage& s, double tol) {
  const auto& sh = s.shape();
  if (sh.m_b < sh.n_a) {
    throw InvalidInputError(
        "instrumental_from_bwi: Bob's input range is smaller than Alice's outcome range");
  }
  const ValidationReport rep = validate_ns_bwi(s, tol);
  if (!rep.passed) {
    throw InvalidInputError("instrumental_from_bwi: assemblage is not non-signalling (" +
                            rep.failures() + ")");
  }
  ScenarioShape out_shape{sh.n_a, sh.m_a, sh.n_a, sh.d, ScenarioKind::Instrumental};
  InstrumentalAssemblage out(out_shape);
  for (int a = 0; a < sh.n_a; ++a)
    for (int x = 0; x < sh.m_a; ++x) out.at(a, x) = s.at(a, x, a);
  return out;
}

void add_ns_bwi_constraints(sdp::HermitianBuilder& hb, const std::vector<int>& blocks,
                            const ScenarioShape& sh) {
  if (static_cast<int>(blocks.size()) != sh.member_count()) {
    throw DimensionError("add_ns_bwi_constraints: one block per member expected");
  }
  const int n_a = sh.n_a, m_a = sh.m_a, m_b = sh.m_b, d = sh.d;
  auto id = [&](int a, int x, int y) { return blocks[(x * m_b + y) * n_a + a]; };
  const CMatrix zero = CMatrix::Zero(d, d);
  for (int y = 0; y < m_b; ++y) {
    for (int x = 1; x < m_a; ++x) {
      std::vector<sdp::HermitianBuilder::BlockRef> terms;
      for (int a = 0; a < n_a; ++a) {
        terms.push_back({id(a, x, y), 0, 0, 1.0});
        terms.push_back({id(a, 0, y), 0, 0, -1.0});
      }
      hb.add_matrix_equality(terms, d, zero, true);
    }
  }
  for (int x = 0; x < m_a; ++x) {
    for (int a = 0; a < n_a; ++a) {
      for (int y = 1; y < m_b; ++y) {
        sdp::LinearForm f;
        hb.trace(f, id(a, x, y), 0, d, 1.0);
        hb.trace(f, id(a, x, 0), 0, d, -1.0);
        hb.add_equality(f, 0.0);
      }
    }
  }
  sdp::LinearForm f;
  for (int a = 0; a < n_a; ++a) hb.trace(f, id(a, 0, 0), 0, d, 1.0);
  hb.add_equality(f, 1.0);
}

InstrumentalMembership instrumental_membership(const InstrumentalAssemblage& s,
                                               double threshold,
                                               const sdp::SolveOptions& opts) {
  const auto& sh = s.shape();
  const int n_a = sh.n_a, m_a = sh.m_a, m_b = sh.n_a, d = sh.d;
  sdp::HermitianBuilder hb;
  std::vector<int> blk(static_cast<std::size_t>(n_a) * m_a * m_b);
  auto id = [&](int a, int x, int y) { return (x * m_b + y) * n_a + a; };
  for (auto& b : blk) b = hb.add_block(d);

  add_ns_bwi_constraints(hb, blk, {n_a, m_a, m_b, d, ScenarioKind::BobWithInput});
  for (int a = 0; a < n_a; ++a) {
    for (int x = 0; x < m_a; ++x) {
      const CMatrix& target = s.at(a, x);
      hb.add_matrix_equality({{blk[id(a, x, a)], 0, 0, 1.0}}, d, target,
                             is_hermitian(target));
    }
  }
  hb.minimize_shift(blk);
  const sdp::SdpSolution sol = sdp::solve(hb.build(), opts);

  InstrumentalMembership out;
  out.report.status = sol.status;
  out.report.threshold = threshold;
  out.report.iterations = sol.iterations;
  if (sol.status == sdp::Status::Infeasible) {
    out.report.feasible = false;
    out.report.margin = INFINITY;
    out.report.detail = "linear constraints admit no BWI extension";
    return out;
  }
  if (!sol.optimal()) {
    throw SolverError(std::string("instrumental_membership: solver returned ") +
                      sdp::to_string(sol.status));
  }
  out.report.margin = std::max(0.0, hb.shift_value(sol));
  out.report.feasible = out.report.margin <= threshold;
  out.report.detail = out.report.feasible ? "non-signalling extension found"
                                          : "no PSD extension (positive shift required)";
  ScenarioShape ext_shape{n_a, m_a, m_b, d, ScenarioKind::BobWithInput};
  BwiAssemblage ext(ext_shape);
  for (int a = 0; a < n_a; ++a)
    for (int x = 0; x < m_a; ++x)
      for (int y = 0; y < m_b; ++y) ext.at(a, x, y) = hb.value(sol, blk[id(a, x, y)]);
  out.extension = std::move(ext);
  return out;
}

// --- Bell statistics ---------------------------------------------------------

BellTable::BellTable(int n_a, int n_b, int m_a, int m_b)
    : n_a_(n_a), n_b_(n_b), m_a_(m_a), m_b_(m_b),
      p_(static_cast<std::size_t>(n_a) * n_b * m_a * m_b, 0.0) {}

void check_povm(const std::vector<CMatrix>& effects, double tol) {
  if (effects.empty()) throw InvalidInputError("POVM has no effects");
  const Eigen::Index d = effects.front().rows();
  CMatrix sum = CMatrix::Zero(d, d);
  for (const CMatrix& e : effects) {
    if (e.rows() != d || e.cols() != d) throw DimensionError("POVM effects differ in shape");
    if (!is_hermitian(e, tol) || !is_psd(e, tol)) {
      throw InvalidInputError("POVM effect is not positive semidefinite");
    }
    sum += e;
  }
  if (max_abs(sum - CMatrix::Identity(d, d)) > tol) {
    throw InvalidInputError("POVM effects do not sum to the identity");
  }
}

BellTable bell_correlations(const BwiAssemblage& s, const std::vector<CMatrix>& povm) {
  check_povm(povm);
  const auto& sh = s.shape();
  if (povm.front().rows() != sh.d) throw DimensionError("POVM dimension differs from d");
  BellTable t(sh.n_a, static_cast<int>(povm.size()), sh.m_a, sh.m_b);
  for (int x = 0; x < sh.m_a; ++x)
    for (int y = 0; y < sh.m_b; ++y)
      for (int a = 0; a < sh.n_a; ++a)
        for (int b = 0; b < t.n_b(); ++b)
          t(a, b, x, y) = trace_product(povm[b], s.at(a, x, y));
  return t;
}

double chsh_value(const BellTable& p) {
  if (p.n_a() != 2 || p.n_b() != 2 || p.m_a() != 2 || p.m_b() != 2) {
    throw DimensionError("chsh_value needs a binary table");
  }
  double v = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
          const int parity = (a + b + x * y) % 2;
          v += (parity == 0 ? 1.0 : -1.0) * p(a, b, x, y);
        }
  return v;
}

// --- Random generation -------------------------------------------------------

namespace {

using Rng = std::mt19937_64;

CMatrix ginibre(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      const double re = g(rng);
      const double im = g(rng);
      m(i, j) = Complex(re, im);
    }
  return m;
}

CMatrix haar_unitary(int n, Rng& rng) {
  const CMatrix g = ginibre(n, n, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < n; ++k) {
    const Complex rk = r(k, k);
    const double mag = std::abs(rk);
    if (mag > 0) q.col(k) *= rk / mag;
  }
  return q;
}

CVector random_state(int n, Rng& rng) {
  CVector v = ginibre(n, 1, rng).col(0);
  return v / v.norm();
}

CMatrix density_matrix(int d, Rng& rng) {
  const CMatrix g = ginibre(d, d, rng);
  CMatrix rho = g * g.adjoint();
  return hermitian_part(rho / rho.trace().real());
}

// Projective measurement with n outcomes from a random basis of C^dim.
std::vector<CMatrix> random_projective(int dim, int n, Rng& rng) {
  const CMatrix u = haar_unitary(dim, rng);
  std::vector<CMatrix> out(n, CMatrix::Zero(dim, dim));
  for (int k = 0; k < dim; ++k) out[k % n] += outer(u.col(k));
  return out;
}

CMatrix sigma_from_state(const CMatrix& rho, int da, int d, const CMatrix& effect) {
  const CMatrix op = kron(effect, CMatrix::Identity(d, d));
  return hermitian_part(partial_trace(op * rho, {da, d}, Subsystem::B));
}

BwiAssemblage ns_traditional(int n_a, int m_a, const CMatrix& reduced, Rng& rng) {
  const int d = static_cast<int>(reduced.rows());
  BwiAssemblage s({n_a, m_a, 1, d, ScenarioKind::Traditional});
  const CMatrix root = psd_sqrt(reduced);
  for (int x = 0; x < m_a; ++x) {
    std::vector<CMatrix> t(n_a);
    CMatrix sum = CMatrix::Zero(d, d);
    for (int a = 0; a < n_a; ++a) {
      // Mixed rank keeps some members rank deficient; the last one is full
      // rank so that the sum is invertible.
      const int rank = a + 1 == n_a ? d : 1 + static_cast<int>(rng() % static_cast<unsigned>(d));
      const CMatrix g = ginibre(d, rank, rng);
      t[a] = g * g.adjoint();
      sum += t[a];
    }
    const CMatrix w = support_ops(hermitian_part(sum)).sqrt_pinv;
    for (int a = 0; a < n_a; ++a) {
      s.at(a, x) = hermitian_part(root * w * t[a] * w * root);
    }
  }
  return s;
}

}  // namespace

CMatrix random_unitary(int n, std::uint64_t seed) {
  Rng rng(seed);
  return haar_unitary(n, rng);
}

CMatrix random_density_matrix(int d, std::uint64_t seed) {
  Rng rng(seed);
  return density_matrix(d, rng);
}

BwiAssemblage random_quantum_bwi(const ScenarioShape& shape, std::uint64_t seed) {
  shape.check();
  Rng rng(seed);
  const int d = shape.d;
  const int da = std::max(d, shape.n_a);
  const CVector psi = random_state(da * d, rng);
  const CMatrix rho = outer(psi);

  std::vector<std::vector<CMatrix>> alice(shape.m_a);
  for (int x = 0; x < shape.m_a; ++x) alice[x] = random_projective(da, shape.n_a, rng);

  // Bob's channel y: rho -> tr_anc V (rho (x) |0><0|) V^dagger
  std::vector<CMatrix> dilations(shape.m_b);
  for (int y = 0; y < shape.m_b; ++y) dilations[y] = haar_unitary(d * d, rng);

  BwiAssemblage s(shape);
  const CMatrix anc0 = basis_projector(d, 0);
  for (int x = 0; x < shape.m_a; ++x) {
    for (int a = 0; a < shape.n_a; ++a) {
      const CMatrix pre = sigma_from_state(rho, da, d, alice[x][a]);
      for (int y = 0; y < shape.m_b; ++y) {
        const CMatrix& v = dilations[y];
        const CMatrix out = v * kron(pre, anc0) * v.adjoint();
        s.at(a, x, y) = hermitian_part(partial_trace(out, {d, d}, Subsystem::A));
      }
    }
  }
  return s;
}

BwiAssemblage random_ns_traditional(int n_a, int m_a, const CMatrix& reduced,
                                    std::uint64_t seed) {
  Rng rng(seed);
  return ns_traditional(n_a, m_a, reduced, rng);
}

SequentialAssemblage random_ns_sequential(const SequentialShape& shape,
                                          std::uint64_t seed) {
  shape.check();
  Rng rng(seed);
  const CMatrix reduced = density_matrix(shape.d, rng);
  const BwiAssemblage first = ns_traditional(shape.n_a1, shape.m_x1, reduced, rng);
  SequentialAssemblage s(shape);
  for (int x1 = 0; x1 < shape.m_x1; ++x1) {
    for (int a1 = 0; a1 < shape.n_a1; ++a1) {
      const BwiAssemblage second =
          ns_traditional(shape.n_a2, shape.m_x2, first.at(a1, x1), rng);
      for (int x2 = 0; x2 < shape.m_x2; ++x2)
        for (int a2 = 0; a2 < shape.n_a2; ++a2) s.at(a1, a2, x1, x2) = second.at(a2, x2);
    }
  }
  return s;
}

SequentialAssemblage random_quantum_sequential(const SequentialShape& shape,
                                               std::uint64_t seed) {
  shape.check();
  Rng rng(seed);
  const int d = shape.d;
  const int da = std::max({d, shape.n_a2});
  const CMatrix rho = outer(random_state(da * d, rng));

  // Instrument x1: isometry C^da -> C^da (x) C^{n_a1}, K_a = (I (x) <a|) V.
  std::vector<std::vector<CMatrix>> kraus(shape.m_x1);
  for (int x1 = 0; x1 < shape.m_x1; ++x1) {
    const CMatrix u = haar_unitary(da * shape.n_a1, rng);
    const CMatrix v = u.leftCols(da);
    for (int a1 = 0; a1 < shape.n_a1; ++a1) {
      CMatrix k(da, da);
      for (int i = 0; i < da; ++i) k.row(i) = v.row(i * shape.n_a1 + a1);
      kraus[x1].push_back(k);
    }
  }
  std::vector<std::vector<CMatrix>> second(shape.m_x2);
  for (int x2 = 0; x2 < shape.m_x2; ++x2) second[x2] = random_projective(da, shape.n_a2, rng);

  SequentialAssemblage s(shape);
  for (int x1 = 0; x1 < shape.m_x1; ++x1)
    for (int x2 = 0; x2 < shape.m_x2; ++x2)
      for (int a1 = 0; a1 < shape.n_a1; ++a1)
        for (int a2 = 0; a2 < shape.n_a2; ++a2) {
          const CMatrix& k = kraus[x1][a1];
          const CMatrix effect = k.adjoint() * second[x2][a2] * k;
          s.at(a1, a2, x1, x2) = sigma_from_state(rho, da, d, effect);
        }
  return s;
}

}  // namespace pqsteer
