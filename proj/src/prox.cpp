#include "fusedl0/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fusedl0 {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<ProxBlock> blocks_of(const Vector& x) {
  std::vector<ProxBlock> blocks;
  const Eigen::Index n = x.size();
  Eigen::Index start = 0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    if (i == n || x[i] != x[i - 1]) {
      blocks.push_back(ProxBlock{start, i, x[start]});
      start = i;
    }
  }
  return blocks;
}

}  // namespace

void ProxParams::validate(Eigen::Index n) const {
  if (n < 1) throw std::invalid_argument("prox: empty input");
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0))
    throw std::invalid_argument("prox: negative penalty");
  if (l.size() != n || u.size() != n)
    throw std::invalid_argument("prox: bound length mismatch");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(l[i] <= 0.0) || !(u[i] >= 0.0))
      throw std::invalid_argument("prox: box must contain 0 (l <= 0 <= u)");
  }
}

double prox_objective(const Vector& x, const Vector& z, const ProxParams& p) {
  const Eigen::Index n = z.size();
  for (Eigen::Index i = 0; i < n; ++i)
    if (x[i] < p.l[i] || x[i] > p.u[i]) return kInf;
  double obj = 0.5 * (x - z).squaredNorm();
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    if (x[i] != x[i + 1]) obj += p.lambda1;
  for (Eigen::Index i = 0; i < n; ++i)
    if (x[i] != 0.0) obj += p.lambda2;
  return obj;
}

ProxResult prox_fused_l0(const Vector& z, const ProxParams& p) {
  const Eigen::Index n = z.size();
  p.validate(n);

  // forward pass: stage functions P_s^* for s = 1..n, all retained for the
  // backtracking pass
  std::vector<PiecewiseQuadratic> stage(static_cast<std::size_t>(n));
  std::vector<MinPoint> stage_min(static_cast<std::size_t>(n));
  std::size_t max_pieces = 0;

  PiecewiseQuadratic f =
      PiecewiseQuadratic::single(0.5, -z[0], 0.5 * z[0] * z[0], -kInf, kInf, 0)
          .add_l0_box(p.lambda2, p.l[0], p.u[0]);
  stage[0] = f;
  stage_min[0] = f.global_min();
  max_pieces = std::max(max_pieces, f.size());

  for (Eigen::Index s = 2; s <= n; ++s) {
    const double cut = stage_min[s - 2].value + p.lambda1;
    f = stage[s - 2]
            .min_with_constant(cut, static_cast<int>(s - 1))
            .add_quadratic(0.5, -z[s - 1], 0.5 * z[s - 1] * z[s - 1])
            .add_l0_box(p.lambda2, p.l[s - 1], p.u[s - 1]);
    stage[s - 1] = f;
    stage_min[s - 1] = f.global_min();
    max_pieces = std::max(max_pieces, f.size());
  }

  // backtracking: peel off the trailing constant block at each changepoint
  ProxResult res;
  res.x = Vector::Zero(n);
  Eigen::Index s = n;
  while (s > 0) {
    const MinPoint m = stage_min[s - 1];
    for (Eigen::Index i = m.tag; i < s; ++i) res.x[i] = m.alpha;
    s = m.tag;
  }

  res.objective = stage_min[static_cast<std::size_t>(n) - 1].value;
  res.blocks = blocks_of(res.x);
  res.stage_values.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    res.stage_values[i] = stage_min[i].value;
  res.max_pieces = max_pieces;

  // global sanity check against the two trivially feasible candidates
  Vector clamped = z.cwiseMax(p.l).cwiseMin(p.u);
  const double cap =
      std::min(prox_objective(Vector::Zero(n), z, p), prox_objective(clamped, z, p));
  if (res.objective > cap + 1e-8 * (1.0 + std::abs(cap)))
    throw std::logic_error("prox: objective above a trivial feasible bound");
  const double direct = prox_objective(res.x, z, p);
  if (std::abs(direct - res.objective) > 1e-8 * (1.0 + std::abs(direct)))
    throw std::logic_error("prox: stage value disagrees with direct objective");

  return res;
}

ProxResult prox_scaled(const Vector& z, double mu, const ProxParams& p) {
  if (!(mu > 0.0)) throw std::invalid_argument("prox: mu must be positive");
  ProxParams q = p;
  q.lambda1 = p.lambda1 / mu;
  q.lambda2 = p.lambda2 / mu;
  ProxResult res = prox_fused_l0(z, q);
  res.objective *= mu;
  for (double& v : res.stage_values) v *= mu;
  return res;
}

ProxResult brute_force_prox(const Vector& z, const ProxParams& p) {
  const Eigen::Index n = z.size();
  p.validate(n);
  if (n > 12) throw std::invalid_argument("brute_force_prox: n > 12");

  // prefix sums for O(1) block means and squared errors
  std::vector<double> ps(n + 1, 0.0), ps2(n + 1, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    ps[i + 1] = ps[i] + z[i];
    ps2[i + 1] = ps2[i] + z[i] * z[i];
  }
  auto block_cost = [&](Eigen::Index a, Eigen::Index b, double v) {
    // 1/2 sum_{i in [a,b)} (v - z_i)^2  (+ lambda2 * len if v != 0)
    const double len = static_cast<double>(b - a);
    double cost = 0.5 * (len * v * v - 2.0 * v * (ps[b] - ps[a]) + ps2[b] - ps2[a]);
    if (v != 0.0) cost += p.lambda2 * len;
    return cost;
  };

  double best_obj = kInf;
  Vector best_x = Vector::Zero(n);

  const unsigned long masks = 1ul << (n - 1);
  std::vector<double> vals(static_cast<std::size_t>(n));
  for (unsigned long mask = 0; mask < masks; ++mask) {
    double obj = 0.0;
    int nblocks = 0;
    bool degenerate = false, infeasible = false;
    Eigen::Index a = 0;
    double prev_val = kInf;
    for (Eigen::Index i = 0; i < n && !infeasible; ++i) {
      const bool cut = (i == n - 1) || ((mask >> i) & 1ul);
      if (!cut) continue;
      const Eigen::Index b = i + 1;
      double lo = -kInf, hi = kInf;
      for (Eigen::Index j = a; j < b; ++j) {
        lo = std::max(lo, p.l[j]);
        hi = std::min(hi, p.u[j]);
      }
      if (lo > hi) {
        infeasible = true;
        break;
      }
      const double mean = (ps[b] - ps[a]) / static_cast<double>(b - a);
      const double cand[4] = {0.0, std::clamp(mean, lo, hi), lo, hi};
      double bv = cand[0], bc = block_cost(a, b, cand[0]);
      for (int t = 1; t < 4; ++t) {
        const double ct = block_cost(a, b, cand[t]);
        if (ct < bc) {
          bc = ct;
          bv = cand[t];
        }
      }
      if (nblocks > 0 && bv == prev_val) {
        degenerate = true;  // covered by the coarser segmentation
        break;
      }
      for (Eigen::Index j = a; j < b; ++j) vals[j] = bv;
      obj += bc;
      prev_val = bv;
      ++nblocks;
      a = b;
    }
    if (infeasible || degenerate) continue;
    obj += p.lambda1 * static_cast<double>(nblocks - 1);
    if (obj < best_obj) {
      best_obj = obj;
      for (Eigen::Index i = 0; i < n; ++i) best_x[i] = vals[i];
    }
  }

  ProxResult res;
  res.x = best_x;
  res.objective = best_obj;
  res.blocks = blocks_of(best_x);
  return res;
}

}  // namespace fusedl0
