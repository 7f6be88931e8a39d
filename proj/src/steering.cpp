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

#include "pqsteer/steering.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "pqsteer/error.hpp"

namespace pqsteer {

using sdp::HermitianBuilder;
using sdp::LinearForm;

// --- Functionals -------------------------------------------------------------

SteeringFunctional::SteeringFunctional(ScenarioShape shape) : shape_(shape) {
  shape_.check();
  coeffs_.assign(shape_.member_count(), CMatrix::Zero(shape_.d, shape_.d));
}

SteeringFunctional::SteeringFunctional(ScenarioShape shape, std::vector<CMatrix> coeffs)
    : shape_(shape), coeffs_(std::move(coeffs)) {
  shape_.check();
  if (static_cast<int>(coeffs_.size()) != shape_.member_count()) {
    throw DimensionError("SteeringFunctional: wrong number of coefficients");
  }
  for (const CMatrix& c : coeffs_)
    if (c.rows() != shape_.d || c.cols() != shape_.d)
      throw DimensionError("SteeringFunctional: coefficient of wrong side");
  check_hermitian();
}

int SteeringFunctional::index(int a, int x, int y) const {
  if (a < 0 || a >= shape_.n_a || x < 0 || x >= shape_.m_a || y < 0 || y >= shape_.m_b)
    throw DimensionError("SteeringFunctional: label out of range");
  return (x * shape_.m_b + y) * shape_.n_a + a;
}

void SteeringFunctional::check_hermitian() const {
  for (const CMatrix& c : coeffs_)
    if (!is_hermitian(c)) throw InvalidInputError("steering coefficient is not Hermitian");
}

bool SteeringFunctional::operator==(const SteeringFunctional& o) const {
  if (!(shape_ == o.shape_) || coeffs_.size() != o.coeffs_.size()) return false;
  for (std::size_t k = 0; k < coeffs_.size(); ++k)
    if (coeffs_[k] != o.coeffs_[k]) return false;
  return true;
}

InstrumentalFunctional::InstrumentalFunctional(ScenarioShape shape) : shape_(shape) {
  shape_.kind = ScenarioKind::Instrumental;
  shape_.m_b = shape_.n_a;
  shape_.check();
  coeffs_.assign(static_cast<std::size_t>(shape_.n_a) * shape_.m_a,
                 CMatrix::Zero(shape_.d, shape_.d));
}

InstrumentalFunctional::InstrumentalFunctional(ScenarioShape shape,
                                               std::vector<CMatrix> coeffs)
    : shape_(shape), coeffs_(std::move(coeffs)) {
  shape_.kind = ScenarioKind::Instrumental;
  shape_.m_b = shape_.n_a;
  shape_.check();
  if (coeffs_.size() != static_cast<std::size_t>(shape_.n_a) * shape_.m_a) {
    throw DimensionError("InstrumentalFunctional: wrong number of coefficients");
  }
  for (const CMatrix& c : coeffs_) {
    if (c.rows() != shape_.d || c.cols() != shape_.d)
      throw DimensionError("InstrumentalFunctional: coefficient of wrong side");
    if (!is_hermitian(c)) throw InvalidInputError("steering coefficient is not Hermitian");
  }
}

int InstrumentalFunctional::index(int a, int x) const {
  if (a < 0 || a >= shape_.n_a || x < 0 || x >= shape_.m_a)
    throw DimensionError("InstrumentalFunctional: label out of range");
  return x * shape_.n_a + a;
}

bool InstrumentalFunctional::operator==(const InstrumentalFunctional& o) const {
  if (!(shape_ == o.shape_) || coeffs_.size() != o.coeffs_.size()) return false;
  for (std::size_t k = 0; k < coeffs_.size(); ++k)
    if (coeffs_[k] != o.coeffs_[k]) return false;
  return true;
}

namespace {

double checked_real(Complex v, const char* what) {
  if (std::abs(v.imag()) > 1e-10 * std::max(1.0, std::abs(v.real()))) {
    std::ostringstream os;
    os << what << ": imaginary part " << v.imag() << " is not negligible";
    throw InvalidInputError(os.str());
  }
  return v.real();
}

}  // namespace

double evaluate(const SteeringFunctional& f, const BwiAssemblage& s) {
  const ScenarioShape& a = f.shape();
  const ScenarioShape& b = s.shape();
  if (a.n_a != b.n_a || a.m_a != b.m_a || a.m_b != b.m_b || a.d != b.d) {
    throw DimensionError("evaluate: functional and assemblage shapes differ");
  }
  Complex total = 0.0;
  for (std::size_t k = 0; k < f.coeffs().size(); ++k)
    total += (f.coeffs()[k] * s.members()[k]).trace();
  return checked_real(total, "evaluate");
}

double evaluate(const InstrumentalFunctional& f, const InstrumentalAssemblage& s) {
  const ScenarioShape& a = f.shape();
  const ScenarioShape& b = s.shape();
  if (a.n_a != b.n_a || a.m_a != b.m_a || a.d != b.d) {
    throw DimensionError("evaluate: functional and assemblage shapes differ");
  }
  Complex total = 0.0;
  for (std::size_t k = 0; k < f.coeffs().size(); ++k)
    total += (f.coeffs()[k] * s.members()[k]).trace();
  return checked_real(total, "evaluate");
}

SteeringFunctional canonical_functional() {
  SteeringFunctional f({2, 3, 2, 2, ScenarioKind::BobWithInput});
  for (int a = 0; a < 2; ++a)
    for (int x = 0; x < 3; ++x) {
      const double sgn = a == 0 ? 1.0 : -1.0;
      const CMatrix base = 0.5 * (pauli::I() - sgn * pauli::by_index(x + 1));
      f.at(a, x, 0) = base;
      f.at(a, x, 1) = base.transpose();
    }
  return f;
}

InstrumentalFunctional post_select(const SteeringFunctional& f) {
  const ScenarioShape& sh = f.shape();
  if (sh.m_b < sh.n_a) throw InvalidInputError("post_select: m_b < n_a");
  InstrumentalFunctional g({sh.n_a, sh.m_a, sh.n_a, sh.d, ScenarioKind::Instrumental});
  for (int a = 0; a < sh.n_a; ++a)
    for (int x = 0; x < sh.m_a; ++x) g.at(a, x) = f.at(a, x, a);
  return g;
}

SteeringFunctional lift(const InstrumentalFunctional& g) {
  const ScenarioShape& sh = g.shape();
  SteeringFunctional f({sh.n_a, sh.m_a, sh.n_a, sh.d, ScenarioKind::BobWithInput});
  for (int a = 0; a < sh.n_a; ++a)
    for (int x = 0; x < sh.m_a; ++x) f.at(a, x, a) = g.at(a, x);
  return f;
}

SteeringFunctional random_psd_functional(const ScenarioShape& shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  SteeringFunctional f(shape);
  for (int k = 0; k < shape.member_count(); ++k) {
    CMatrix g(shape.d, shape.d);
    for (int j = 0; j < shape.d; ++j)
      for (int i = 0; i < shape.d; ++i) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        g(i, j) = Complex(re, im);
      }
    const int a = k % shape.n_a;
    const int rest = k / shape.n_a;
    f.at(a, rest / shape.m_b, rest % shape.m_b) =
        hermitian_part(g * g.adjoint() / static_cast<double>(shape.d));
  }
  return f;
}

// --- Shared solver plumbing --------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

BoundResult to_bound(const sdp::SdpProblem& p, const sdp::SdpSolution& sol,
                     Clock::time_point start) {
  BoundResult r;
  r.value = sol.primal_value;
  r.status = sol.status;
  r.residuals = sol.residuals;
  r.iterations = sol.iterations;
  r.equalities_raw = static_cast<int>(p.equalities.size());
  r.equalities_kept = sol.equalities_kept;
  r.block_sides = p.blocks;
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

void require_optimal(const sdp::SdpSolution& sol, const char* what) {
  if (!sol.optimal()) {
    throw SolverError(std::string(what) + ": solver returned " + sdp::to_string(sol.status) +
                      (sol.message.empty() ? "" : " (" + sol.message + ")"));
  }
}

FeasibilityReport shift_report(const HermitianBuilder& hb, const sdp::SdpSolution& sol,
                               double threshold, const char* what) {
  FeasibilityReport r;
  r.status = sol.status;
  r.threshold = threshold;
  r.iterations = sol.iterations;
  if (sol.status == sdp::Status::Infeasible) {
    r.feasible = false;
    r.margin = INFINITY;
    r.detail = "linear conditions are inconsistent";
    return r;
  }
  require_optimal(sol, what);
  r.margin = std::max(0.0, hb.shift_value(sol));
  r.feasible = r.margin <= threshold;
  return r;
}

}  // namespace

// --- LHS ---------------------------------------------------------------------

std::vector<std::vector<int>> enumerate_strategies(int n_a, int m_a) {
  if (n_a < 1 || m_a < 1) throw InvalidInputError("enumerate_strategies: counts must be >= 1");
  long long count = 1;
  for (int x = 0; x < m_a; ++x) {
    count *= n_a;
    if (count > kMaxStrategies) {
      throw InvalidInputError("deterministic strategy count exceeds " +
                              std::to_string(kMaxStrategies));
    }
  }
  std::vector<std::vector<int>> out;
  std::vector<int> cur(m_a, 0);
  for (long long k = 0; k < count; ++k) {
    out.push_back(cur);
    for (int x = m_a - 1; x >= 0; --x) {
      if (++cur[x] < n_a) break;
      cur[x] = 0;
    }
  }
  return out;
}

BwiAssemblage LhsModel::assemblage() const {
  BwiAssemblage s(shape);
  for (std::size_t l = 0; l < strategies.size(); ++l)
    for (int x = 0; x < shape.m_a; ++x)
      for (int y = 0; y < shape.m_b; ++y)
        s.at(strategies[l][x], x, y) += at(static_cast<int>(l), y);
  return s;
}

namespace {

struct LhsProgram {
  HermitianBuilder hb;
  std::vector<int> blocks;  // lambda * m_b + y
  std::vector<std::vector<int>> strategies;
};

LhsProgram lhs_program(const ScenarioShape& sh) {
  LhsProgram p;
  p.strategies = enumerate_strategies(sh.n_a, sh.m_a);
  const int n_l = static_cast<int>(p.strategies.size());
  for (int k = 0; k < n_l * sh.m_b; ++k) p.blocks.push_back(p.hb.add_block(sh.d));
  for (int l = 0; l < n_l; ++l)
    for (int y = 1; y < sh.m_b; ++y) {
      LinearForm f;
      p.hb.trace(f, p.blocks[l * sh.m_b + y], 0, sh.d, 1.0);
      p.hb.trace(f, p.blocks[l * sh.m_b], 0, sh.d, -1.0);
      p.hb.add_equality(f, 0.0);
    }
  LinearForm norm;
  for (int l = 0; l < n_l; ++l) p.hb.trace(norm, p.blocks[l * sh.m_b], 0, sh.d, 1.0);
  p.hb.add_equality(norm, 1.0);
  return p;
}

LhsModel read_model(const LhsProgram& p, const sdp::SdpSolution& sol,
                    const ScenarioShape& sh) {
  LhsModel m;
  m.shape = sh;
  m.shape.kind = ScenarioKind::BobWithInput;
  m.strategies = p.strategies;
  for (int b : p.blocks) m.omega.push_back(p.hb.value(sol, b));
  return m;
}

}  // namespace

LhsBound lhs_bound(const SteeringFunctional& f, const sdp::SolveOptions& opts) {
  const auto start = Clock::now();
  const ScenarioShape& sh = f.shape();
  LhsProgram p = lhs_program(sh);
  for (std::size_t l = 0; l < p.strategies.size(); ++l)
    for (int y = 0; y < sh.m_b; ++y) {
      CMatrix g = CMatrix::Zero(sh.d, sh.d);
      for (int x = 0; x < sh.m_a; ++x) g += f.at(p.strategies[l][x], x, y);
      p.hb.trace_with(p.hb.objective(), p.blocks[l * sh.m_b + y], 0, 0, g);
    }
  const sdp::SdpProblem prob = p.hb.build();
  const sdp::SdpSolution sol = sdp::solve(prob, opts);
  require_optimal(sol, "lhs_bound");
  LhsBound out;
  out.result = to_bound(prob, sol, start);
  out.model = read_model(p, sol, sh);
  return out;
}

LhsMembership lhs_membership(const BwiAssemblage& s, double threshold,
                             const sdp::SolveOptions& opts) {
  const ScenarioShape& sh = s.shape();
  LhsProgram p = lhs_program(sh);
  for (int x = 0; x < sh.m_a; ++x)
    for (int y = 0; y < sh.m_b; ++y)
      for (int a = 0; a < sh.n_a; ++a) {
        std::vector<HermitianBuilder::BlockRef> terms;
        for (std::size_t l = 0; l < p.strategies.size(); ++l)
          if (p.strategies[l][x] == a)
            terms.push_back({p.blocks[l * sh.m_b + y], 0, 0, 1.0});
        const CMatrix& target = s.at(a, x, y);
        p.hb.add_matrix_equality(terms, sh.d, target, is_hermitian(target));
      }
  p.hb.minimize_shift(p.blocks);
  const sdp::SdpSolution sol = sdp::solve(p.hb.build(), opts);
  LhsMembership out;
  out.report = shift_report(p.hb, sol, threshold, "lhs_membership");
  if (out.report.feasible) {
    out.model = read_model(p, sol, sh);
    out.report.detail = "LHS model found";
  } else if (out.report.detail.empty()) {
    out.report.detail = "no LHS model (positive shift required)";
  }
  return out;
}

// --- NS ----------------------------------------------------------------------

NsBound ns_bound(const SteeringFunctional& f, const sdp::SolveOptions& opts) {
  const auto start = Clock::now();
  ScenarioShape sh = f.shape();
  HermitianBuilder hb;
  std::vector<int> blocks;
  for (int k = 0; k < sh.member_count(); ++k) blocks.push_back(hb.add_block(sh.d));
  add_ns_bwi_constraints(hb, blocks, sh);
  for (int k = 0; k < sh.member_count(); ++k)
    hb.trace_with(hb.objective(), blocks[k], 0, 0, f.coeffs()[k]);
  const sdp::SdpProblem prob = hb.build();
  const sdp::SdpSolution sol = sdp::solve(prob, opts);
  require_optimal(sol, "ns_bound");
  NsBound out;
  out.result = to_bound(prob, sol, start);
  std::vector<CMatrix> members;
  for (int b : blocks) members.push_back(hb.value(sol, b));
  out.optimizer = BwiAssemblage(sh, std::move(members));
  return out;
}

// --- Moment matrix -----------------------------------------------------------

std::string WordSet::label(int w) const {
  if (w == 0) return "()";
  if (w <= m_a) return "x" + std::to_string(w - 1);
  if (w <= m_a + m_b) return "y" + std::to_string(w - 1 - m_a);
  const int k = w - 1 - m_a - m_b;
  return "x" + std::to_string(k / m_b) + "y" + std::to_string(k % m_b);
}

namespace {

// Pairs of word pairs that must carry equal blocks, and the family they
// belong to.
struct BlockTie {
  int u1, v1, u2, v2;
  int family;
};

enum Family { kIdentity, kProjector, kCommuting, kAliceRepeat, kBobRepeat, kAliceScalar };
const char* kFamilyNames[] = {"identity",     "projector", "commuting_xy",
                              "alice_repeat", "bob_repeat", "alice_scalar"};

std::vector<BlockTie> block_ties(const WordSet& w) {
  std::vector<BlockTie> t;
  auto tie = [&](int u1, int v1, int u2, int v2, int fam) {
    if (u1 == u2 && v1 == v2) return;
    t.push_back({u1, v1, u2, v2, fam});
  };
  const int e = WordSet::empty();
  for (int v = 1; v < w.size(); ++v) tie(v, v, e, v, kProjector);
  for (int x = 0; x < w.m_a; ++x)
    for (int y = 0; y < w.m_b; ++y) {
      tie(e, w.xy(x, y), w.x(x), w.xy(x, y), kCommuting);
      tie(w.x(x), w.xy(x, y), w.y(y), w.xy(x, y), kCommuting);
      tie(w.y(y), w.xy(x, y), w.x(x), w.y(y), kCommuting);
    }
  for (int x = 0; x < w.m_a; ++x)
    for (int x2 = 0; x2 < w.m_a; ++x2)
      for (int y = 0; y < w.m_b; ++y) {
        tie(w.x(x), w.xy(x2, y), w.xy(x, y), w.xy(x2, y), kAliceRepeat);
        tie(w.xy(x, y), w.xy(x2, y), w.xy(x, y), w.x(x2), kAliceRepeat);
      }
  for (int x = 0; x < w.m_a; ++x)
    for (int y = 0; y < w.m_b; ++y)
      for (int y2 = 0; y2 < w.m_b; ++y2) {
        tie(w.y(y), w.xy(x, y2), w.xy(x, y), w.xy(x, y2), kBobRepeat);
        tie(w.xy(x, y), w.xy(x, y2), w.xy(x, y), w.y(y2), kBobRepeat);
      }
  return t;
}

void add_moment_conditions(HermitianBuilder& hb, int g, const WordSet& w, int d) {
  const CMatrix zero = CMatrix::Zero(d, d);
  hb.add_matrix_equality({{g, 0, 0, 1.0}}, d, CMatrix::Identity(d, d), true);
  for (const BlockTie& t : block_ties(w)) {
    hb.add_matrix_equality({{g, t.u1 * d, t.v1 * d, 1.0}, {g, t.u2 * d, t.v2 * d, -1.0}}, d,
                           zero, false);
  }
  // Gamma(x, x') proportional to the identity; x = x' follows from the
  // projector ties and the linkage below.
  for (int x = 0; x < w.m_a; ++x)
    for (int x2 = x + 1; x2 < w.m_a; ++x2) {
      const int r0 = w.x(x) * d, c0 = w.x(x2) * d;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          LinearForm re, im;
          if (i == j) {
            if (i == 0) continue;
            hb.re(re, g, r0 + i, c0 + i, 1.0);
            hb.re(re, g, r0, c0, -1.0);
            hb.im(im, g, r0 + i, c0 + i, 1.0);
            hb.im(im, g, r0, c0, -1.0);
          } else {
            hb.re(re, g, r0 + i, c0 + j, 1.0);
            hb.im(im, g, r0 + i, c0 + j, 1.0);
          }
          hb.add_equality(std::move(re), 0.0);
          hb.add_equality(std::move(im), 0.0);
        }
    }
}

// Re tr of the off-diagonal sub-block starting at (r0, c0).
void add_block_trace(const HermitianBuilder& hb, LinearForm& f, int g, int r0, int c0, int n,
                     double coeff) {
  for (int k = 0; k < n; ++k) hb.re(f, g, r0 + k, c0 + k, coeff);
}

MomentMatrix read_moment(const HermitianBuilder& hb, const sdp::SdpSolution& sol, int g,
                         const WordSet& w, int d) {
  MomentMatrix m;
  m.words = w;
  m.d = d;
  m.gamma = hb.value(sol, g);
  return m;
}

void require_dichotomic(const ScenarioShape& sh, const char* what) {
  if (sh.n_a != 2) {
    throw InvalidInputError(std::string(what) + ": the moment-matrix relaxation needs n_a = 2");
  }
}

}  // namespace

std::vector<ConstraintCheck> moment_residuals(const MomentMatrix& m, double tol) {
  const WordSet& w = m.words;
  const int d = m.d;
  if (m.gamma.rows() != static_cast<Eigen::Index>(w.size()) * d) {
    throw DimensionError("moment_residuals: matrix side does not match the word set");
  }
  double res[6] = {0, 0, 0, 0, 0, 0};
  res[kIdentity] = max_abs(m.block(0, 0) - CMatrix::Identity(d, d));
  for (const BlockTie& t : block_ties(w)) {
    res[t.family] =
        std::max(res[t.family], max_abs(m.block(t.u1, t.v1) - m.block(t.u2, t.v2)));
  }
  for (int x = 0; x < w.m_a; ++x)
    for (int x2 = 0; x2 < w.m_a; ++x2) {
      const CMatrix b = m.block(w.x(x), w.x(x2));
      const Complex s = b.trace() / static_cast<double>(d);
      res[kAliceScalar] =
          std::max(res[kAliceScalar], max_abs(b - s * CMatrix::Identity(d, d)));
    }
  std::vector<ConstraintCheck> out;
  for (int k = 0; k < 6; ++k) out.push_back({kFamilyNames[k], res[k], res[k] <= tol});
  const double herm = hermitian_deviation(m.gamma);
  const double psd = herm > tol ? herm : std::max(0.0, -min_eigenvalue(m.gamma));
  out.push_back({"psd", psd, psd <= tol});
  return out;
}

QtildeProgram build_qtilde_problem(const SteeringFunctional& f) {
  const ScenarioShape& sh = f.shape();
  require_dichotomic(sh, "build_qtilde_problem");
  QtildeProgram p;
  p.words = WordSet{sh.m_a, sh.m_b};
  p.d = sh.d;
  const int d = sh.d;
  const WordSet& w = p.words;
  HermitianBuilder& hb = p.builder;
  p.gamma = hb.add_block(d * w.size());
  const int g = p.gamma;
  for (int k = 0; k < sh.m_a * sh.m_b; ++k) p.complement.push_back(hb.add_block(d));

  add_moment_conditions(hb, g, w, d);

  // Gamma(0, x) = t_x I with t_x = tr sigma_{0|xy} = d tr Gamma(0, xy), every y.
  for (int x = 0; x < sh.m_a; ++x) {
    const int c0 = w.x(x) * d;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        LinearForm im;
        hb.im(im, g, i, c0 + j, 1.0);
        hb.add_equality(std::move(im), 0.0);
        if (i != j) {
          LinearForm re;
          hb.re(re, g, i, c0 + j, 1.0);
          hb.add_equality(std::move(re), 0.0);
        }
      }
    for (int y = 0; y < sh.m_b; ++y)
      for (int i = 0; i < d; ++i) {
        LinearForm re;
        hb.re(re, g, i, c0 + i, 1.0);
        add_block_trace(hb, re, g, 0, w.xy(x, y) * d, d, -static_cast<double>(d));
        hb.add_equality(std::move(re), 0.0);
      }
  }
  // Bob's marginal sigma_y = d Gamma(0, y)^T has unit trace.
  for (int y = 0; y < sh.m_b; ++y) {
    LinearForm f1;
    add_block_trace(hb, f1, g, 0, w.y(y) * d, d, static_cast<double>(d));
    hb.add_equality(std::move(f1), 1.0);
  }
  // sigma_{1|xy} = d (Gamma(0, y) - Gamma(0, xy))^T as its own PSD block.
  const CMatrix zero = CMatrix::Zero(d, d);
  const double dd = static_cast<double>(d);
  for (int x = 0; x < sh.m_a; ++x)
    for (int y = 0; y < sh.m_b; ++y) {
      const int s = p.complement[x * sh.m_b + y];
      hb.add_matrix_equality({{s, 0, 0, 1.0},
                              {g, 0, w.y(y) * d, -dd, true},
                              {g, 0, w.xy(x, y) * d, dd, true}},
                             d, zero, false);
    }

  // Objective: tr F_0 sigma_0 = d tr(F_0^T Gamma(0, xy)), tr F_1 sigma_1 on
  // the complement block.
  for (int x = 0; x < sh.m_a; ++x)
    for (int y = 0; y < sh.m_b; ++y) {
      hb.trace_with(hb.objective(), g, 0, w.xy(x, y) * d, f.at(0, x, y).transpose(), dd);
      hb.trace_with(hb.objective(), p.complement[x * sh.m_b + y], 0, 0, f.at(1, x, y));
    }
  p.problem = hb.build();
  p.equalities_raw = static_cast<int>(p.problem.equalities.size());
  return p;
}

QtildeBound qtilde_bound(const SteeringFunctional& f, const sdp::SolveOptions& opts) {
  const auto start = Clock::now();
  const QtildeProgram p = build_qtilde_problem(f);
  const sdp::SdpSolution sol = sdp::solve(p.problem, opts);
  require_optimal(sol, "qtilde_bound");
  QtildeBound out;
  out.result = to_bound(p.problem, sol, start);
  out.moment = read_moment(p.builder, sol, p.gamma, p.words, p.d);
  const ScenarioShape& sh = f.shape();
  BwiAssemblage s(ScenarioShape{2, sh.m_a, sh.m_b, sh.d, ScenarioKind::BobWithInput});
  const double dd = static_cast<double>(p.d);
  for (int x = 0; x < sh.m_a; ++x)
    for (int y = 0; y < sh.m_b; ++y) {
      s.at(0, x, y) = hermitian_part(dd * out.moment.block(0, p.words.xy(x, y)).transpose());
      s.at(1, x, y) = p.builder.value(sol, p.complement[x * sh.m_b + y]);
    }
  out.optimizer = std::move(s);
  return out;
}

QtildeBound qtilde_instrumental_bound(const InstrumentalFunctional& f,
                                      const sdp::SolveOptions& opts) {
  if (f.shape().n_a != 2) {
    throw InvalidInputError("qtilde_instrumental_bound: the relaxation needs n_a = 2");
  }
  return qtilde_bound(lift(f), opts);
}

QtildeMembership qtilde_membership(const BwiAssemblage& s, double threshold,
                                   const sdp::SolveOptions& opts) {
  const ScenarioShape& sh = s.shape();
  require_dichotomic(sh, "qtilde_membership");
  const ValidationReport rep = validate_ns_bwi(s);
  if (!rep.passed) {
    throw InvalidInputError("qtilde_membership: assemblage is not non-signalling (" +
                            rep.failures() + ")");
  }
  const int d = sh.d;
  const double dd = static_cast<double>(d);
  const WordSet w{sh.m_a, sh.m_b};
  HermitianBuilder hb;
  const int g = hb.add_block(d * w.size());
  add_moment_conditions(hb, g, w, d);
  for (int y = 0; y < sh.m_b; ++y) {
    const CMatrix target = s.reduced(0, y).transpose() / dd;
    hb.add_matrix_equality({{g, 0, w.y(y) * d, 1.0}}, d, target, false);
  }
  for (int x = 0; x < sh.m_a; ++x) {
    for (int y = 0; y < sh.m_b; ++y) {
      const CMatrix target = s.at(0, x, y).transpose() / dd;
      hb.add_matrix_equality({{g, 0, w.xy(x, y) * d, 1.0}}, d, target, false);
    }
    const CMatrix target = s.at(0, x, 0).trace().real() * CMatrix::Identity(d, d);
    hb.add_matrix_equality({{g, 0, w.x(x) * d, 1.0}}, d, target, false);
  }
  hb.minimize_shift({g});
  const sdp::SdpSolution sol = sdp::solve(hb.build(), opts);
  QtildeMembership out;
  out.report = shift_report(hb, sol, threshold, "qtilde_membership");
  if (out.report.feasible) {
    out.moment = read_moment(hb, sol, g, w, d);
    out.report.detail = "moment matrix found";
  } else if (out.report.detail.empty()) {
    out.report.detail = "no positive moment matrix (positive shift required)";
  }
  return out;
}

}  // namespace pqsteer
