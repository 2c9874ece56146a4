#pragma once

#include "fusedl0/driver.hpp"

namespace fusedl0 {

struct PGStepResult {
  Vector x_bar;
  double mu_bar = 0.0;
  int m = 0;                  // backtracking count
  double F_bar = 0.0;
  double residual = 0.0;      // mu_bar * ||x - x_bar||_2
  double residual_inf = 0.0;  // mu_bar * ||x - x_bar||_inf
};

// one proximal gradient step with backtracking: smallest m >= 0 such that
// x_bar in prox_{(mu0 tau^m)^-1 g}(x - (mu0 tau^m)^-1 grad f(x)) satisfies
// F(x_bar) <= F(x) - alpha/2 * ||x - x_bar||^2
PGStepResult pg_step(const ProblemSpec& spec, const Vector& x, double mu0,
                     double tau, double alpha);

// plain proximal gradient: the outer loop of pgipn_solve with the Newton
// step disabled
SolveTrace pg_solve(const ProblemSpec& spec, const SolverConfig& config);

}  // namespace fusedl0
