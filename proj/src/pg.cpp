#include "fusedl0/pg.hpp"

#include <cmath>
#include <stdexcept>

namespace fusedl0 {

PGStepResult pg_step(const ProblemSpec& spec, const Vector& x, double mu0,
                     double tau, double alpha) {
  if (!(mu0 > 0.0)) throw std::invalid_argument("pg_step: mu0 must be positive");
  if (!(tau > 1.0)) throw std::invalid_argument("pg_step: tau must exceed 1");

  const double Fx = eval_F(spec, x);
  if (!std::isfinite(Fx)) throw std::invalid_argument("pg_step: x is infeasible");
  const Vector grad = spec.loss.gradient(x);

  double mu = mu0;
  for (int m = 0; m <= 100; ++m, mu *= tau) {
    const Vector z = x - grad / mu;
    // mu too small for this gradient: z (or its square inside the stage
    // functions) overflows, so the trial cannot succeed
    if (!z.allFinite() || z.cwiseAbs().maxCoeff() > 1e150) continue;
    const ProxResult pr = prox_scaled(z, mu, spec.prox_params);
    const double diff2 = (x - pr.x).squaredNorm();
    const double F_bar = eval_F(spec, pr.x);
    if (F_bar <= Fx - 0.5 * alpha * diff2) {
      PGStepResult r;
      r.x_bar = pr.x;
      r.mu_bar = mu;
      r.m = m;
      r.F_bar = F_bar;
      r.residual = mu * std::sqrt(diff2);
      r.residual_inf = mu * (x - pr.x).cwiseAbs().maxCoeff();
      return r;
    }
  }
  throw std::runtime_error(
      "pg_step: backtracking exceeded 100 trials (bad Lipschitz estimate?)");
}

}  // namespace fusedl0
