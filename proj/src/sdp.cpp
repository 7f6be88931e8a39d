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

#include "pqsteer/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <tuple>

#include "pqsteer/error.hpp"

namespace pqsteer::sdp {

// ---------------------------------------------------------------------------
// LinearForm

void LinearForm::add(int block, int row, int col, double coeff) {
  if (coeff == 0.0) return;
  if (row > col) std::swap(row, col);
  auto [it, inserted] = coeffs_.try_emplace({block, row, col}, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0.0) coeffs_.erase(it);
  }
}

void LinearForm::add(const LinearForm& other, double scale) {
  for (const auto& [key, v] : other.coeffs_) {
    add(std::get<0>(key), std::get<1>(key), std::get<2>(key), scale * v);
  }
}

std::vector<Term> LinearForm::terms() const {
  std::vector<Term> out;
  out.reserve(coeffs_.size());
  for (const auto& [key, v] : coeffs_) {
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), v});
  }
  return out;
}

// ---------------------------------------------------------------------------
// SdpProblem

namespace {

void check_form(const LinearForm& form, const std::vector<int>& blocks,
                const std::string& where) {
  for (const Term& t : form.terms()) {
    if (t.block < 0 || t.block >= static_cast<int>(blocks.size())) {
      throw DimensionError(where + ": reference to undeclared block " +
                           std::to_string(t.block));
    }
    const int n = blocks[t.block];
    if (t.row < 0 || t.col < 0 || t.row >= n || t.col >= n) {
      std::ostringstream os;
      os << where << ": entry (" << t.row << "," << t.col
         << ") outside block " << t.block << " of side " << n;
      throw DimensionError(os.str());
    }
  }
}

}  // namespace

void SdpProblem::validate() const {
  std::size_t entries = 0;
  for (int n : blocks) {
    if (n < 1) throw DimensionError("block side must be positive");
    entries += static_cast<std::size_t>(n) * (n + 1) / 2;
  }
  check_form(objective, blocks, "objective");
  for (std::size_t i = 0; i < equalities.size(); ++i) {
    check_form(equalities[i].lhs, blocks, "equality " + std::to_string(i));
  }
  if (equalities.size() > entries * 4 + 16) {
    // Far more rows than unknowns is almost certainly a construction bug.
    throw DimensionError("equality count greatly exceeds variable count");
  }
}

void SdpProblem::dump(std::ostream& os) const {
  os << "blocks " << blocks.size();
  for (int n : blocks) os << ' ' << n;
  os << '\n';
  os.precision(17);
  auto write = [&os](const LinearForm& f) {
    for (const Term& t : f.terms()) {
      os << ' ' << t.block << ' ' << t.row << ' ' << t.col << ' ' << t.coeff;
    }
  };
  os << "objective " << (sense == Sense::Maximize ? "max" : "min") << ' '
     << objective_offset;
  write(objective);
  os << '\n';
  for (const Equality& e : equalities) {
    os << "eq " << e.rhs;
    write(e.lhs);
    os << '\n';
  }
}

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::Unbounded: return "Unbounded";
    case Status::MaxIter: return "MaxIter";
    case Status::NumericalTrouble: return "NumericalTrouble";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Hermitian embedding

RMatrix embed_hermitian(const CMatrix& h) {
  if (h.rows() != h.cols()) throw DimensionError("embed_hermitian: not square");
  if (hermitian_deviation(h) > kHermitianTol * std::max(1.0, max_abs(h))) {
    throw InvalidInputError("embed_hermitian: input is not Hermitian");
  }
  const Eigen::Index n = h.rows();
  const RMatrix re = h.real();
  const RMatrix im = h.imag();
  RMatrix out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = re;
  out.topRightCorner(n, n) = -im;
  out.bottomLeftCorner(n, n) = im;
  out.bottomRightCorner(n, n) = re;
  return 0.5 * (out + out.transpose());
}

CMatrix extract_hermitian(const RMatrix& y) {
  const Eigen::Index n = y.rows() / 2;
  RMatrix re = 0.5 * (y.topLeftCorner(n, n) + y.bottomRightCorner(n, n));
  RMatrix im = 0.5 * (y.bottomLeftCorner(n, n) - y.topRightCorner(n, n));
  CMatrix out(n, n);
  out.real() = re;
  out.imag() = im;
  return hermitian_part(out);
}

// ---------------------------------------------------------------------------
// Interior point solver

namespace {

struct Entry {
  int block;
  int row;
  int col;
  double w;  // coefficient of the scalar X_rc in the functional
};

using Blocks = std::vector<RMatrix>;

double inner(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k].array() * b[k].array()).sum();
  return s;
}

double frob(const Blocks& a) { return std::sqrt(inner(a, a)); }

Blocks zeros_like(const std::vector<int>& sides) {
  Blocks out;
  for (int n : sides) out.push_back(RMatrix::Zero(n, n));
  return out;
}

Blocks identity_like(const std::vector<int>& sides) {
  Blocks out;
  for (int n : sides) out.push_back(RMatrix::Identity(n, n));
  return out;
}

void axpy(Blocks& y, double a, const Blocks& x) {
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += a * x[k];
}

double apply_entries(const std::vector<Entry>& es, const Blocks& x) {
  double s = 0.0;
  for (const Entry& e : es) s += e.w * x[e.block](e.row, e.col);
  return s;
}

void add_entries(const std::vector<Entry>& es, double scale, Blocks& out) {
  for (const Entry& e : es) {
    if (e.row == e.col) {
      out[e.block](e.row, e.row) += scale * e.w;
    } else {
      out[e.block](e.row, e.col) += 0.5 * scale * e.w;
      out[e.block](e.col, e.row) += 0.5 * scale * e.w;
    }
  }
}

struct Operator {
  std::vector<int> sides;
  std::vector<std::vector<Entry>> rows;  // A_i
  std::vector<Entry> cost;               // C
  RVector b;

  int m() const { return static_cast<int>(rows.size()); }

  RVector apply(const Blocks& x) const {
    RVector out(m());
    for (int i = 0; i < m(); ++i) out(i) = apply_entries(rows[i], x);
    return out;
  }

  Blocks adjoint(const RVector& y) const {
    Blocks out = zeros_like(sides);
    for (int i = 0; i < m(); ++i) add_entries(rows[i], y(i), out);
    return out;
  }

  Blocks cost_matrix() const {
    Blocks out = zeros_like(sides);
    add_entries(cost, 1.0, out);
    return out;
  }
};

// sym(X W S^-1) blockwise, with S^-1 applied through its Cholesky factor.
using Factors = std::vector<Eigen::LLT<RMatrix>>;

Blocks hkm_apply(const Blocks& x, const Blocks& w, const Factors& sf) {
  Blocks out;
  out.reserve(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const RMatrix xw = x[k] * w[k];
    const RMatrix t = sf[k].solve(xw.transpose()).transpose();
    out.push_back(0.5 * (t + t.transpose()));
  }
  return out;
}

// M_ij = tr(A_i X A_j S^-1) = <G_i, G_j> with G_i = L_S^-1 A_i L_X. The
// factored form avoids an explicit S^-1, whose entries blow up near the
// boundary, and keeps M positive semidefinite by construction.
RMatrix schur_complement(const Operator& op, const Blocks& x, const Blocks& s) {
  const int m = op.m();
  std::vector<std::size_t> offsets(x.size());
  std::size_t total = 0;
  std::vector<RMatrix> lx, ls;
  for (std::size_t k = 0; k < x.size(); ++k) {
    offsets[k] = total;
    total += static_cast<std::size_t>(x[k].size());
    lx.push_back(Eigen::LLT<RMatrix>(x[k]).matrixL());
    ls.push_back(Eigen::LLT<RMatrix>(s[k]).matrixL());
  }
  RMatrix g = RMatrix::Zero(m, static_cast<Eigen::Index>(total));
  std::vector<RMatrix> dense(x.size());
  std::vector<bool> touched(x.size());
  for (int i = 0; i < m; ++i) {
    std::fill(touched.begin(), touched.end(), false);
    for (const Entry& e : op.rows[i]) {
      if (!touched[e.block]) {
        dense[e.block] = RMatrix::Zero(x[e.block].rows(), x[e.block].cols());
        touched[e.block] = true;
      }
      if (e.row == e.col) {
        dense[e.block](e.row, e.row) += e.w;
      } else {
        dense[e.block](e.row, e.col) += 0.5 * e.w;
        dense[e.block](e.col, e.row) += 0.5 * e.w;
      }
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (!touched[k]) continue;
      RMatrix t = dense[k] * lx[k];
      ls[k].triangularView<Eigen::Lower>().solveInPlace(t);
      g.row(i).segment(offsets[k], t.size()) = Eigen::Map<const RVector>(t.data(), t.size());
    }
  }
  RMatrix mat = RMatrix::Zero(m, m);
  mat.selfadjointView<Eigen::Lower>().rankUpdate(g);
  return mat.selfadjointView<Eigen::Lower>();
}

// Largest step in [0, inf) keeping X + a dX PSD; x must be positive definite.
double max_step(const Blocks& x, const Blocks& dx) {
  double alpha = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < x.size(); ++k) {
    Eigen::LLT<RMatrix> llt(x[k]);
    if (llt.info() != Eigen::Success) return 0.0;
    RMatrix linv = llt.matrixL().solve(RMatrix::Identity(x[k].rows(), x[k].cols()));
    RMatrix t = linv * dx[k] * linv.transpose();
    t = 0.5 * (t + t.transpose());
    Eigen::SelfAdjointEigenSolver<RMatrix> es(t, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    if (lmin < 0) alpha = std::min(alpha, -1.0 / lmin);
  }
  return alpha;
}

struct Reduction {
  std::vector<int> kept;        // original indices, in kept order
  bool consistent = true;
  RVector certificate;          // over original rows when inconsistent
};

std::vector<double> entries_vector(const std::vector<Entry>& es,
                                   const std::vector<std::size_t>& offsets,
                                   const std::vector<int>& sides,
                                   std::size_t total) {
  std::vector<double> v(total, 0.0);
  for (const Entry& e : es) {
    const int n = sides[e.block];
    // packed upper triangle, row-major
    const std::size_t idx = offsets[e.block] +
                            static_cast<std::size_t>(e.row) * n -
                            static_cast<std::size_t>(e.row) * (e.row - 1) / 2 +
                            (e.col - e.row);
    v[idx] += e.w;
  }
  return v;
}

Reduction reduce_rows(const std::vector<std::vector<Entry>>& rows,
                      const RVector& b, const std::vector<int>& sides,
                      double tol) {
  Reduction red;
  const int m = static_cast<int>(rows.size());
  if (m == 0) return red;
  std::vector<std::size_t> offsets(sides.size());
  std::size_t total = 0;
  for (std::size_t k = 0; k < sides.size(); ++k) {
    offsets[k] = total;
    total += static_cast<std::size_t>(sides[k]) * (sides[k] + 1) / 2;
  }
  RMatrix at(total, m);  // columns are constraint vectors
  for (int i = 0; i < m; ++i) {
    auto v = entries_vector(rows[i], offsets, sides, total);
    for (std::size_t r = 0; r < total; ++r) at(r, i) = v[r];
  }
  for (int i = 0; i < m; ++i) {
    const double nrm = at.col(i).norm();
    if (nrm > 0) at.col(i) /= nrm;
  }
  Eigen::ColPivHouseholderQR<RMatrix> qr(at);
  qr.setThreshold(tol);
  const int rank = static_cast<int>(qr.rank());
  const auto perm = qr.colsPermutation().indices();
  for (int k = 0; k < rank; ++k) red.kept.push_back(perm(k));
  std::sort(red.kept.begin(), red.kept.end());

  // Consistency of the dropped rows against the kept ones.
  std::vector<bool> is_kept(m, false);
  for (int i : red.kept) is_kept[i] = true;
  RMatrix basis(total, red.kept.size());
  RVector bk(red.kept.size());
  for (std::size_t k = 0; k < red.kept.size(); ++k) {
    basis.col(k) = at.col(red.kept[k]);
  }
  // Work with normalised columns: a_i / n_i, b_i / n_i.
  std::vector<double> norms(m, 0.0);
  for (int i = 0; i < m; ++i) {
    auto v = entries_vector(rows[i], offsets, sides, total);
    double s = 0.0;
    for (double t : v) s += t * t;
    norms[i] = std::sqrt(s);
  }
  for (std::size_t k = 0; k < red.kept.size(); ++k) {
    bk(k) = b(red.kept[k]) / norms[red.kept[k]];
  }
  Eigen::ColPivHouseholderQR<RMatrix> bqr;
  if (!red.kept.empty()) bqr.compute(basis);
  for (int i = 0; i < m; ++i) {
    if (is_kept[i]) continue;
    const double bi = norms[i] > 0 ? b(i) / norms[i] : b(i);
    RVector w = RVector::Zero(red.kept.size());
    if (!red.kept.empty() && norms[i] > 0) w = bqr.solve(RVector(at.col(i)));
    const double predicted = red.kept.empty() ? 0.0 : w.dot(bk);
    const double scale = 1.0 + std::abs(bi) + bk.cwiseAbs().maxCoeff();
    if (std::abs(bi - predicted) > 1e3 * tol * scale) {
      red.consistent = false;
      // y_i e_i - sum w_k e_k (in normalised coordinates) annihilates A^T.
      RVector y = RVector::Zero(m);
      const double ni = norms[i] > 0 ? norms[i] : 1.0;
      y(i) = 1.0 / ni;
      for (std::size_t k = 0; k < red.kept.size(); ++k) {
        y(red.kept[k]) -= w(k) / norms[red.kept[k]];
      }
      const double by = b.dot(y);
      red.certificate = y / by;
      return red;
    }
  }
  return red;
}

std::vector<Entry> to_entries(const LinearForm& f) {
  std::vector<Entry> out;
  for (const Term& t : f.terms()) out.push_back({t.block, t.row, t.col, t.coeff});
  return out;
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SolveOptions& opts) {
  problem.validate();
  SdpSolution sol;
  const int m_all = static_cast<int>(problem.equalities.size());
  sol.multipliers = RVector::Zero(m_all);

  std::vector<std::vector<Entry>> rows;
  RVector b_all(m_all);
  for (int i = 0; i < m_all; ++i) {
    rows.push_back(to_entries(problem.equalities[i].lhs));
    b_all(i) = problem.equalities[i].rhs;
  }

  const Reduction red = reduce_rows(rows, b_all, problem.blocks, opts.redundancy_tol);
  if (!red.consistent) {
    sol.status = Status::Infeasible;
    sol.infeasibility_certificate = red.certificate;
    sol.message = "equality constraints are inconsistent";
    sol.primal_value = problem.sense == Sense::Maximize ? -INFINITY : INFINITY;
    sol.dual_value = sol.primal_value;
    return sol;
  }

  Operator op;
  op.sides = problem.blocks;
  std::vector<double> row_scale;
  op.b.resize(red.kept.size());
  for (std::size_t k = 0; k < red.kept.size(); ++k) {
    const int i = red.kept[k];
    double s = 0.0;
    for (const Entry& e : rows[i]) s += e.w * e.w * (e.row == e.col ? 1.0 : 0.5);
    s = std::sqrt(s);
    if (s == 0) s = 1.0;
    std::vector<Entry> scaled = rows[i];
    for (Entry& e : scaled) e.w /= s;
    op.rows.push_back(std::move(scaled));
    op.b(k) = b_all(i) / s;
    row_scale.push_back(s);
  }
  sol.equalities_kept = op.m();

  const double sign = problem.sense == Sense::Maximize ? -1.0 : 1.0;
  std::vector<Entry> cost;
  if (problem.sense != Sense::Feasibility) {
    cost = to_entries(problem.objective);
    for (Entry& e : cost) e.w *= sign;
  }
  double cscale = 0.0;
  for (const Entry& e : cost) cscale += e.w * e.w * (e.row == e.col ? 1.0 : 0.5);
  cscale = std::sqrt(cscale);
  if (cscale == 0.0) cscale = 1.0;
  for (Entry& e : cost) e.w /= cscale;
  op.cost = cost;

  const auto& sides = op.sides;
  int ntot = 0;
  for (int n : sides) ntot += n;
  const Blocks cmat = op.cost_matrix();
  const double bnorm = op.b.norm();
  const double cnorm = frob(cmat);

  Blocks x = identity_like(sides);
  Blocks s = identity_like(sides);
  RVector y = RVector::Zero(op.m());
  double tau = 1.0;
  double kappa = 1.0;

  auto finish_values = [&](double pobj_s, double dobj_s) {
    sol.primal_value = sign * cscale * pobj_s + problem.objective_offset;
    sol.dual_value = sign * cscale * dobj_s + problem.objective_offset;
    sol.block_values.clear();
    for (const RMatrix& xb : x) sol.block_values.push_back(xb / tau);
    for (std::size_t k = 0; k < red.kept.size(); ++k) {
      sol.multipliers(red.kept[k]) = sign * cscale * y(k) / tau / row_scale[k];
    }
  };

  // Gram matrix A A^* for the final primal projection. It does not depend on
  // the iterate, so it stays well conditioned when the Schur complement does not.
  RMatrix gram(op.m(), op.m());
  for (int j = 0; j < op.m(); ++j) {
    RVector e = RVector::Zero(op.m());
    e(j) = 1.0;
    gram.col(j) = op.apply(op.adjoint(e));
  }
  Eigen::LDLT<RMatrix> gram_ldlt;
  if (op.m() > 0) gram_ldlt.compute(gram);
  const bool gram_ok = op.m() > 0 && gram_ldlt.info() == Eigen::Success;
  auto try_polish = [&](double dobj_s) {
    if (op.m() == 0) return false;
    if (!gram_ok) return false;
    Blocks xp = x;
    for (auto& blk : xp) blk /= tau;
    RVector w = gram_ldlt.solve(RVector(op.b - op.apply(xp)));
    axpy(xp, 1.0, op.adjoint(w));
    const double pres_p = (op.apply(xp) - op.b).norm() / (1.0 + bnorm);
    const double pobj_p = inner(cmat, xp);
    const double gap_p = std::abs(pobj_p - dobj_s) / (1.0 + std::abs(pobj_p) + std::abs(dobj_s));
    if (!(pres_p <= opts.feas_tol && gap_p <= opts.gap_tol && sol.residuals.dual_feas <= opts.feas_tol)) {
      return false;
    }
    for (const RMatrix& blk : xp) {
      Eigen::SelfAdjointEigenSolver<RMatrix> es(blk, Eigen::EigenvaluesOnly);
      if (es.eigenvalues()(0) < -opts.feas_tol) return false;
    }
    sol.status = Status::Optimal;
    sol.message = "optimal after primal projection";
    sol.residuals.primal_feas = pres_p;
    sol.residuals.gap = gap_p;
    sol.primal_value = sign * cscale * pobj_p + problem.objective_offset;
    sol.dual_value = sign * cscale * dobj_s + problem.objective_offset;
    sol.block_values = xp;
    for (std::size_t k = 0; k < red.kept.size(); ++k) {
      sol.multipliers(red.kept[k]) = sign * cscale * y(k) / tau / row_scale[k];
    }
    return true;
  };

  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    sol.iterations = iter;
    const RVector ax = op.apply(x);
    const Blocks aty = op.adjoint(y);
    const double cx = inner(cmat, x);
    const double by = op.b.dot(y);
    const double mu = (inner(x, s) + tau * kappa) / (ntot + 1);

    const RVector f1 = ax - op.b * tau;
    Blocks f2 = aty;
    axpy(f2, 1.0, s);
    axpy(f2, -tau, cmat);
    const double f3 = by - cx - kappa;

    // Normalised residuals.
    const double pres = (ax / tau - op.b).norm() / (1.0 + bnorm);
    Blocks dres_m = aty;
    axpy(dres_m, 1.0, s);
    for (auto& blk : dres_m) blk /= tau;
    axpy(dres_m, -1.0, cmat);
    const double dres = frob(dres_m) / (1.0 + cnorm);
    const double pobj = cx / tau;
    const double dobj = by / tau;
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    sol.residuals = {pres, dres, gap};

    if (pres <= opts.feas_tol && dres <= opts.feas_tol && gap <= opts.gap_tol) {
      sol.status = Status::Optimal;
      finish_values(pobj, dobj);
      return sol;
    }
    if (dres <= opts.feas_tol && gap <= opts.gap_tol && pres <= 1e3 * opts.feas_tol &&
        try_polish(dobj)) {
      return sol;
    }
    if (by > 0 && kappa > tau) {
      Blocks ray = aty;
      axpy(ray, 1.0, s);
      if (frob(ray) / by <= opts.feas_tol) {
        sol.status = Status::Infeasible;
        RVector cert = RVector::Zero(m_all);
        for (std::size_t k = 0; k < red.kept.size(); ++k) {
          cert(red.kept[k]) = y(k) / row_scale[k];
        }
        sol.infeasibility_certificate = cert / b_all.dot(cert);
        sol.message = "primal infeasible (Farkas certificate found)";
        sol.primal_value = problem.sense == Sense::Maximize ? -INFINITY : INFINITY;
        sol.dual_value = sol.primal_value;
        return sol;
      }
    }
    if (cx < 0 && kappa > tau) {
      if (ax.norm() / (-cx) <= opts.feas_tol) {
        sol.status = Status::Unbounded;
        sol.message = "dual infeasible (primal improving ray found)";
        sol.primal_value = problem.sense == Sense::Maximize ? INFINITY : -INFINITY;
        sol.dual_value = sol.primal_value;
        return sol;
      }
    }
    if (iter == opts.max_iter) break;

    // Inverse of S and Schur complement.
    Blocks z;
    Factors sf;
    for (const RMatrix& sb : s) {
      Eigen::LLT<RMatrix> llt(sb);
      if (llt.info() != Eigen::Success) {
        sol.status = Status::NumericalTrouble;
        sol.message = "dual slack lost definiteness";
        finish_values(pobj, dobj);
        return sol;
      }
      z.push_back(llt.solve(RMatrix::Identity(sb.rows(), sb.cols())));
      sf.push_back(std::move(llt));
    }
    RMatrix schur = schur_complement(op, x, s);
    const double diag_scale =
        op.m() > 0 ? std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff()) : 1.0;
    const RMatrix schur_exact = schur;
    Eigen::LLT<RMatrix> chol(schur);
    if (chol.info() != Eigen::Success) {
      schur.diagonal().array() += 1e-14 * diag_scale;
      chol.compute(schur);
      if (chol.info() != Eigen::Success) {
        sol.status = Status::NumericalTrouble;
        sol.message = "Schur complement is not positive definite";
        finish_values(pobj, dobj);
        return sol;
      }
    }

    const Blocks lc = hkm_apply(x, cmat, sf);
    const RVector gc = op.apply(lc);
    const double clc = inner(cmat, lc);
    const Blocks lf2 = hkm_apply(x, f2, sf);
    const RVector alf2 = op.apply(lf2);
    const double clf2 = inner(cmat, lf2);
    const RVector g = gc + op.b;
    // Cholesky solve plus refinement steps against the unregularised matrix;
    // late iterations are ill-conditioned.
    auto schur_solve = [&](const RVector& rhs) {
      RVector sol_v = chol.solve(rhs);
      for (int k = 0; k < 2; ++k) sol_v += chol.solve(RVector(rhs - schur_exact * sol_v));
      return sol_v;
    };
    const RVector q = op.m() > 0 ? schur_solve(g) : RVector();

    struct Direction {
      Blocks dx, ds;
      RVector dy;
      double dtau, dkappa;
    };
    auto direction = [&](double eta, const Blocks& rc, double rtk) {
      const RVector h = -eta * f1 - op.apply(rc) - eta * alf2;
      const RVector p = op.m() > 0 ? schur_solve(h) : RVector();
      const double num = -eta * f3 - (op.m() ? op.b.dot(p) : 0.0) + inner(cmat, rc) +
                         eta * clf2 + (op.m() ? gc.dot(p) : 0.0) + rtk / tau;
      const double den = (op.m() ? op.b.dot(q) - gc.dot(q) : 0.0) + clc + kappa / tau;
      Direction d;
      d.dtau = num / den;
      d.dy = op.m() > 0 ? RVector(p + d.dtau * q) : RVector();
      d.dkappa = (rtk - kappa * d.dtau) / tau;
      d.ds = op.adjoint(d.dy);
      for (auto& blk : d.ds) blk = -blk;
      axpy(d.ds, -eta, f2);
      axpy(d.ds, d.dtau, cmat);
      // dX = Rc - sym(X dS Z)
      d.dx = rc;
      axpy(d.dx, -1.0, hkm_apply(x, d.ds, sf));
      // Remove the error in A dX - b dtau = -eta f1 left by the Schur solve.
      if (gram_ok) {
        const RVector err = op.apply(d.dx) - d.dtau * op.b + eta * f1;
        axpy(d.dx, -1.0, op.adjoint(gram_ldlt.solve(err)));
      }
      return d;
    };
    auto scalar_step = [](double v, double dv) {
      return dv < 0 ? -v / dv : std::numeric_limits<double>::infinity();
    };
    auto step_len = [&](const Direction& d) {
      double a = std::min(max_step(x, d.dx), max_step(s, d.ds));
      a = std::min(a, scalar_step(tau, d.dtau));
      a = std::min(a, scalar_step(kappa, d.dkappa));
      return a;
    };

    // Predictor.
    Blocks rc_aff = x;
    for (auto& blk : rc_aff) blk = -blk;
    const Direction aff = direction(1.0, rc_aff, -tau * kappa);
    const double a_aff = std::min(1.0, step_len(aff));
    Blocks xa = x, sa = s;
    axpy(xa, a_aff, aff.dx);
    axpy(sa, a_aff, aff.ds);
    const double mu_aff =
        (inner(xa, sa) + (tau + a_aff * aff.dtau) * (kappa + a_aff * aff.dkappa)) /
        (ntot + 1);
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

    // Corrector with second-order term.
    Blocks rc = z;
    for (auto& blk : rc) blk *= sigma * mu;
    axpy(rc, -1.0, x);
    axpy(rc, -1.0, hkm_apply(aff.dx, aff.ds, sf));
    const double rtk = sigma * mu - tau * kappa - aff.dtau * aff.dkappa;
    Direction d = direction(1.0 - sigma, rc, rtk);
    double amax = step_len(d);
    if (amax < 0.1) {
      // Poorly centred: a first-order step with stronger centring.
      const double sc = std::max(sigma, 0.5);
      Blocks rc_c = z;
      for (auto& blk : rc_c) blk *= sc * mu;
      axpy(rc_c, -1.0, x);
      const Direction c = direction(1.0 - sc, rc_c, sc * mu - tau * kappa);
      const double ac = step_len(c);
      if (ac > amax) {
        d = c;
        amax = ac;
      }
    }
    const double alpha = std::min(1.0, 0.95 * amax);
    if (!(alpha > 1e-12)) {
      sol.status = Status::NumericalTrouble;
      sol.message = "step length collapsed";
      finish_values(pobj, dobj);
      return sol;
    }
    axpy(x, alpha, d.dx);
    axpy(s, alpha, d.ds);
    if (op.m() > 0) y += alpha * d.dy;
    tau += alpha * d.dtau;
    kappa += alpha * d.dkappa;
    for (auto& blk : x) blk = 0.5 * (blk + blk.transpose()).eval();
    for (auto& blk : s) blk = 0.5 * (blk + blk.transpose()).eval();
  }
  sol.status = Status::MaxIter;
  sol.message = "iteration limit reached";
  finish_values(inner(cmat, x) / tau, op.b.dot(y) / tau);
  return sol;
}

// ---------------------------------------------------------------------------
// HermitianBuilder

int HermitianBuilder::add_block(int n) {
  if (n < 1) throw DimensionError("HermitianBuilder: block side must be positive");
  sides_.push_back(n);
  return static_cast<int>(sides_.size()) - 1;
}

void HermitianBuilder::re(LinearForm& form, int block, int i, int j,
                          double coeff) const {
  const int n = sides_.at(block);
  // Re H_ij = (Y_ij + Y_{n+i,n+j}) / 2
  form.add(block, i, j, 0.5 * coeff);
  form.add(block, n + i, n + j, 0.5 * coeff);
}

void HermitianBuilder::im(LinearForm& form, int block, int i, int j,
                          double coeff) const {
  if (i == j) return;
  const int n = sides_.at(block);
  // Im H_ij = (Y_{n+i,j} - Y_{i,n+j}) / 2
  form.add(block, n + i, j, 0.5 * coeff);
  form.add(block, i, n + j, -0.5 * coeff);
}

void HermitianBuilder::re_scaled(LinearForm& form, int block, int i, int j,
                                 Complex c) const {
  re(form, block, i, j, c.real());
  im(form, block, i, j, -c.imag());
}

void HermitianBuilder::im_scaled(LinearForm& form, int block, int i, int j,
                                 Complex c) const {
  im(form, block, i, j, c.real());
  re(form, block, i, j, c.imag());
}

void HermitianBuilder::trace_with(LinearForm& form, int block, int r0, int c0,
                                  const CMatrix& f, double coeff) const {
  // tr(F H) = sum_pq F_qp H_pq
  for (Eigen::Index p = 0; p < f.rows(); ++p) {
    for (Eigen::Index q = 0; q < f.cols(); ++q) {
      const Complex c = coeff * f(q, p);
      if (c == Complex(0.0)) continue;
      re_scaled(form, block, r0 + static_cast<int>(p), c0 + static_cast<int>(q), c);
    }
  }
}

void HermitianBuilder::trace(LinearForm& form, int block, int r0, int n,
                             double coeff) const {
  for (int k = 0; k < n; ++k) re(form, block, r0 + k, r0 + k, coeff);
}

void HermitianBuilder::add_equality(LinearForm lhs, double rhs) {
  equalities_.push_back({std::move(lhs), rhs});
}

void HermitianBuilder::add_matrix_equality(const std::vector<BlockRef>& terms,
                                           int n, const CMatrix& rhs,
                                           bool hermitian_rhs) {
  if (rhs.rows() != n || rhs.cols() != n) {
    throw DimensionError("add_matrix_equality: rhs has wrong shape");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = hermitian_rhs ? i : 0; j < n; ++j) {
      LinearForm re_form, im_form;
      for (const BlockRef& t : terms) {
        const int r = t.r0 + (t.transpose ? j : i);
        const int c = t.c0 + (t.transpose ? i : j);
        re_scaled(re_form, t.block, r, c, t.coeff);
        im_scaled(im_form, t.block, r, c, t.coeff);
      }
      add_equality(std::move(re_form), rhs(i, j).real());
      if (!(hermitian_rhs && i == j)) {
        add_equality(std::move(im_form), rhs(i, j).imag());
      }
    }
  }
}

void HermitianBuilder::minimize_shift(const std::vector<int>& blocks) {
  shifted_.assign(sides_.size(), false);
  for (int b : blocks) shifted_.at(b) = true;
  objective_ = LinearForm{};
  offset_ = 0.0;
  sense_ = Sense::Minimize;
}

namespace {

// Rewrites Y_rr of shifted blocks as P_rr - t.
LinearForm apply_shift(const LinearForm& form, const std::vector<bool>& shifted,
                       int shift_block) {
  LinearForm out = form;
  for (const Term& t : form.terms()) {
    if (t.row == t.col && t.block < static_cast<int>(shifted.size()) &&
        shifted[t.block]) {
      out.add(shift_block, 0, 0, -t.coeff);
    }
  }
  return out;
}

}  // namespace

SdpProblem HermitianBuilder::build() const {
  SdpProblem p;
  for (int n : sides_) p.blocks.push_back(2 * n);
  p.objective = objective_;
  p.objective_offset = offset_;
  p.equalities = equalities_;
  p.sense = sense_;
  if (has_shift()) {
    const int shift_block = static_cast<int>(sides_.size());
    p.blocks.push_back(1);
    for (Equality& e : p.equalities) e.lhs = apply_shift(e.lhs, shifted_, shift_block);
    p.objective = LinearForm{};
    p.objective.add(shift_block, 0, 0, 1.0);
    p.objective_offset = 0.0;
    p.sense = Sense::Minimize;
  }
  return p;
}

double HermitianBuilder::shift_value(const SdpSolution& sol) const {
  if (!has_shift()) return 0.0;
  const std::size_t k = sides_.size();
  if (sol.block_values.size() <= k) return 0.0;
  return sol.block_values[k](0, 0);
}

CMatrix HermitianBuilder::value(const SdpSolution& sol, int block) const {
  if (block < 0 || block >= static_cast<int>(sides_.size()) ||
      block >= static_cast<int>(sol.block_values.size())) {
    throw DimensionError("HermitianBuilder::value: no such block in solution");
  }
  CMatrix h = extract_hermitian(sol.block_values[block]);
  if (has_shift() && shifted_[block]) {
    h -= shift_value(sol) * CMatrix::Identity(h.rows(), h.cols());
  }
  return h;
}

}  // namespace pqsteer::sdp
