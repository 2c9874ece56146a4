#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "fusedl0/pwq.hpp"

namespace fusedl0 {

using Vector = Eigen::VectorXd;

// Parameters of g = lambda1*||Bhat x||_0 + lambda2*||x||_0 + delta_[l,u],
// where Bhat is the first-difference matrix. The box must contain 0
// componentwise (l <= 0 <= u).
struct ProxParams {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  Vector l;
  Vector u;

  void validate(Eigen::Index n) const;  // throws std::invalid_argument
};

// Constant segment of the prox output: x[start..end) == value (0-based,
// half-open).
struct ProxBlock {
  Eigen::Index start = 0;
  Eigen::Index end = 0;
  double value = 0.0;
};

struct ProxResult {
  Vector x;
  double objective = 0.0;  // h(x; z) = 1/2||x-z||^2 + g(x), the optimal value
  std::vector<ProxBlock> blocks;
  std::vector<double> stage_values;       // H(1..n)
  std::vector<std::size_t> stage_pieces;  // pieces of P_s^*, s = 1..n
  std::size_t max_pieces = 0;             // max over stage_pieces
};

// h(x; z) evaluated directly; +inf outside the box
double prox_objective(const Vector& x, const Vector& z, const ProxParams& p);

// exact member of prox_g(z) by dynamic programming over stage functions
ProxResult prox_fused_l0(const Vector& z, const ProxParams& p);

// member of prox_{mu^-1 g}(z): same box, penalties divided by mu; the
// reported objective is for the scaled problem mu/2*||x-z||^2 + g(x)
ProxResult prox_scaled(const Vector& z, double mu, const ProxParams& p);

// exhaustive oracle over segmentations and per-block candidates; n <= 12
ProxResult brute_force_prox(const Vector& z, const ProxParams& p);

}  // namespace fusedl0
