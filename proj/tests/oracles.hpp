#pragma once

// Independent references the tests check the implementation against. These
// deliberately recompute everything from first principles and share no code
// with the library paths they verify.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "fusedl0/model.hpp"
#include "fusedl0/newton.hpp"
#include "fusedl0/prox.hpp"
#include "fusedl0/pwq.hpp"

namespace oracles {

using fusedl0::Matrix;
using fusedl0::Vector;

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// pointwise replay of a pwq operation sequence

struct NaivePwq {
  struct Base {
    double lo, hi, a, b, c;
  };
  struct Op {
    enum Kind { add_quadratic, add_l0_box, min_with_constant } kind;
    double p1 = 0, p2 = 0, p3 = 0;
  };

  std::vector<Base> base;
  std::vector<Op> ops;

  double eval(double x) const {
    double v = kInf;
    for (const Base& p : base)
      if (p.lo <= x && x <= p.hi)
        v = std::min(v, (p.a * x + p.b) * x + p.c);
    for (const Op& op : ops) {
      switch (op.kind) {
        case Op::add_quadratic:
          if (v < kInf) v += (op.p1 * x + op.p2) * x + op.p3;
          break;
        case Op::add_l0_box:
          if (x < op.p2 || x > op.p3)
            v = kInf;
          else if (v < kInf && x != 0.0)
            v += op.p1;
          break;
        case Op::min_with_constant:
          v = std::min(v, op.p1);
          break;
      }
    }
    return v;
  }
};

// ---------------------------------------------------------------------------
// exchange optimality: zeroing a block, merging adjacent blocks to their
// clamped combined mean, or re-centering a block at its clamped mean must not
// decrease h(.; z). Returns the worst decrease found (negative = violation).

inline double worst_exchange_decrease(const fusedl0::ProxResult& res,
                                      const Vector& z,
                                      const fusedl0::ProxParams& p) {
  const double h0 = fusedl0::prox_objective(res.x, z, p);
  double worst = 0.0;
  auto consider = [&](const Vector& xp) {
    const double h = fusedl0::prox_objective(xp, z, p);
    worst = std::min(worst, h - h0);
  };

  const auto& blocks = res.blocks;
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const auto& b = blocks[j];

    Vector xz = res.x;
    for (Eigen::Index i = b.start; i < b.end; ++i) xz[i] = 0.0;
    consider(xz);

    double lo = -kInf, hi = kInf, sum = 0.0;
    for (Eigen::Index i = b.start; i < b.end; ++i) {
      lo = std::max(lo, p.l[i]);
      hi = std::min(hi, p.u[i]);
      sum += z[i];
    }
    Vector xc = res.x;
    const double mean = sum / static_cast<double>(b.end - b.start);
    const double vc = std::clamp(mean, lo, hi);
    for (Eigen::Index i = b.start; i < b.end; ++i) xc[i] = vc;
    consider(xc);

    if (j + 1 < blocks.size()) {
      const auto& nb = blocks[j + 1];
      double mlo = lo, mhi = hi, msum = sum;
      for (Eigen::Index i = nb.start; i < nb.end; ++i) {
        mlo = std::max(mlo, p.l[i]);
        mhi = std::min(mhi, p.u[i]);
        msum += z[i];
      }
      if (mlo <= mhi) {
        Vector xm = res.x;
        const double mv =
            std::clamp(msum / static_cast<double>(nb.end - b.start), mlo, mhi);
        for (Eigen::Index i = b.start; i < nb.end; ++i) xm[i] = mv;
        consider(xm);
      }
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// central finite differences

template <typename F>
Vector fd_gradient(const F& f, const Vector& x, double h = 1e-6) {
  Vector g(x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    xp[i] = xi + h;
    const double fp = f(xp);
    xp[i] = xi - h;
    const double fm = f(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// ---------------------------------------------------------------------------
// dense min-norm distance to grad + Range(Btilde^T) + N_box(v), in the
// non-aggregated reduced coordinates. Enumerates which bound-active
// coordinates contribute a nonzero normal component, projects onto the
// spanned subspace, and keeps faces whose normal signs are admissible.

inline double min_norm_residual(const std::vector<std::vector<Eigen::Index>>& blocks,
                                const Vector& grad_full,   // one entry per member
                                const Vector& v_full,      // member values
                                const Vector& l_full, const Vector& u_full) {
  const Eigen::Index dim = grad_full.size();

  // Columns of the constraint range: per block, a basis of zero-sum vectors.
  // Within a block every normal ray e_i is equivalent modulo that span, so a
  // single representative ray per block covers all faces of the cone and
  // keeps the generator matrix full rank (unique, sign-checkable
  // coefficients).
  std::vector<Vector> span_cols;
  std::vector<Vector> free_cols;                    // lo == hi blocks
  std::vector<std::pair<Vector, int>> signed_rays;  // (+-1 = required sign)
  Eigen::Index offset = 0;
  for (const auto& mem : blocks) {
    const Eigen::Index L = static_cast<Eigen::Index>(mem.size());
    for (Eigen::Index t = 0; t + 1 < L; ++t) {
      Vector col = Vector::Zero(dim);
      col[offset + t] = 1.0;
      col[offset + t + 1] = -1.0;
      span_cols.push_back(col);
    }
    bool at_lo = false, at_hi = false;
    for (Eigen::Index t = 0; t < L; ++t) {
      if (v_full[offset + t] == l_full[offset + t]) at_lo = true;
      if (v_full[offset + t] == u_full[offset + t]) at_hi = true;
    }
    Vector rep = Vector::Zero(dim);
    rep[offset] = 1.0;
    if (at_lo && at_hi)
      free_cols.push_back(rep);
    else if (at_lo)
      signed_rays.emplace_back(rep, -1);  // nu <= 0 at a lower bound
    else if (at_hi)
      signed_rays.emplace_back(rep, +1);
    offset += L;
  }

  const std::size_t nb = signed_rays.size();
  double best = kInf;
  for (std::size_t mask = 0; mask < (1ull << nb); ++mask) {
    std::vector<std::size_t> active;
    for (std::size_t t = 0; t < nb; ++t)
      if (mask & (1ull << t)) active.push_back(t);

    const Eigen::Index cols = static_cast<Eigen::Index>(
        span_cols.size() + free_cols.size() + active.size());
    Vector residual = grad_full;
    Vector coef;
    if (cols > 0) {
      Matrix W(dim, cols);
      Eigen::Index c = 0;
      for (const Vector& col : span_cols) W.col(c++) = col;
      for (const Vector& col : free_cols) W.col(c++) = col;
      for (std::size_t t : active) W.col(c++) = signed_rays[t].first;
      coef = W.completeOrthogonalDecomposition().solve(-grad_full);
      residual = grad_full + W * coef;
    }

    bool ok = true;
    for (std::size_t t = 0; t < active.size(); ++t) {
      const double nu = coef[static_cast<Eigen::Index>(
          span_cols.size() + free_cols.size() + t)];
      const int side = signed_rays[active[t]].second;
      if (side == -1 && nu > 1e-12) ok = false;
      if (side == +1 && nu < -1e-12) ok = false;
    }
    if (ok) best = std::min(best, residual.norm());
  }
  return best;
}

// ---------------------------------------------------------------------------
// dense active-set reference for the box QP
//   min g^T (w - w0) + 1/2 (w - w0)^T H (w - w0)  s.t. lo <= w <= hi
// Enumerates the 3^q bound patterns, solves the free block, checks KKT signs.

inline Vector active_set_box_qp(const Matrix& H, const Vector& g,
                                const Vector& w0, const Vector& lo,
                                const Vector& hi) {
  const Eigen::Index q = g.size();
  Vector best;
  double best_obj = kInf;

  std::vector<int> state(static_cast<std::size_t>(q), 0);  // 0 free, 1 lo, 2 hi
  const long total = static_cast<long>(std::pow(3.0, static_cast<double>(q)));
  for (long code = 0; code < total; ++code) {
    long c = code;
    for (Eigen::Index i = 0; i < q; ++i) {
      state[static_cast<std::size_t>(i)] = static_cast<int>(c % 3);
      c /= 3;
    }

    Vector w(q);
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < q; ++i) {
      if (state[static_cast<std::size_t>(i)] == 1)
        w[i] = lo[i];
      else if (state[static_cast<std::size_t>(i)] == 2)
        w[i] = hi[i];
      else
        free.push_back(i);
    }

    const Eigen::Index nf = static_cast<Eigen::Index>(free.size());
    if (nf > 0) {
      Matrix Hff(nf, nf);
      Vector rhs(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        for (Eigen::Index b = 0; b < nf; ++b) Hff(a, b) = H(free[a], free[b]);
        double s = g[free[a]];
        for (Eigen::Index j = 0; j < q; ++j) {
          if (state[static_cast<std::size_t>(j)] == 0) continue;
          s += H(free[a], j) * (w[j] - w0[j]);
        }
        rhs[a] = -s;
      }
      const Vector wf = Hff.ldlt().solve(rhs);
      for (Eigen::Index a = 0; a < nf; ++a) w[free[a]] = w0[free[a]] + wf[a];
    }

    // feasibility of the free part
    bool ok = true;
    for (Eigen::Index i = 0; i < q && ok; ++i)
      if (w[i] < lo[i] - 1e-10 || w[i] > hi[i] + 1e-10) ok = false;
    if (!ok) continue;

    // KKT signs at the active bounds
    const Vector grad = g + H * (w - w0);
    for (Eigen::Index i = 0; i < q && ok; ++i) {
      if (state[static_cast<std::size_t>(i)] == 1 && grad[i] < -1e-8) ok = false;
      if (state[static_cast<std::size_t>(i)] == 2 && grad[i] > 1e-8) ok = false;
    }
    if (!ok) continue;

    const Vector d = w - w0;
    const double obj = g.dot(d) + 0.5 * d.dot(H * d);
    if (obj < best_obj) {
      best_obj = obj;
      best = w;
    }
  }
  return best;
}

}  // namespace oracles
