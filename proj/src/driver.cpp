#include "fusedl0/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fusedl0/pg.hpp"
#include "fusedl0/rng.hpp"

namespace fusedl0 {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double mu_for_iter(const SolverConfig& cfg, double L1) {
  double mu = std::max(L1, 1e-12) / 0.95;
  if (cfg.mu_mode == MuMode::interval)
    mu = std::clamp(mu, cfg.mu_min, cfg.mu_max);
  return mu;
}

// block-wise convex combination x + alpha*(y - x): keeps members of a block
// bit-identical, zeros exact, and the result inside the box
Vector combine_on_blocks(const Vector& x, double alpha,
                         const BlockStructure& bs, const Vector& w) {
  Vector out = Vector::Zero(x.size());
  for (std::size_t j = 0; j < bs.members.size(); ++j) {
    const Eigen::Index jj = static_cast<Eigen::Index>(j);
    const double w0 = x[bs.members[j].front()];
    const double v =
        std::clamp(w0 + alpha * (w[jj] - w0), bs.lo[jj], bs.hi[jj]);
    for (Eigen::Index i : bs.members[j]) out[i] = v;
  }
  return out;
}

SolveTrace run_loop(const ProblemSpec& spec, const SolverConfig& cfg,
                    bool enable_newton) {
  cfg.validate();
  spec.prox_params.validate(spec.n);

  Vector x = cfg.x0.size() > 0 ? cfg.x0 : Vector::Zero(spec.n);
  if (x.size() != spec.n)
    throw std::invalid_argument("solve: x0 dimension mismatch");
  if (!std::isfinite(eval_F(spec, x)))
    throw std::invalid_argument("solve: x0 is infeasible");

  const double L1 = spec.loss.is_glm() ? estimate_L1(spec) : 1.0;

  SolveTrace tr;
  const auto t_start = Clock::now();

  int k = 0;
  while (true) {
    const auto t_iter = Clock::now();
    const double Fx = eval_F(spec, x);
    const PGStepResult step =
        pg_step(spec, x, mu_for_iter(cfg, L1), cfg.tau, cfg.alpha);

    IterRecord row;
    row.k = k;
    row.F = Fx;
    row.residual = step.residual;
    row.residual_inf = step.residual_inf;
    row.mu_bar = step.mu_bar;
    {
      const SupportPair sup = supports_of(x);
      row.S_size = static_cast<int>(sup.S.size());
      row.T_size = static_cast<int>(sup.T.size());
    }
    row.kind = StepKind::PG;
    row.alpha_step = 1.0;

    const double stop_res =
        cfg.stop_norm == StopNorm::inf ? step.residual_inf : step.residual;
    if (stop_res <= cfg.epsilon) {
      row.t_ms = ms_since(t_iter);
      tr.iters.push_back(row);
      tr.status = "converged";
      break;
    }
    if (k >= cfg.max_iter) {
      row.t_ms = ms_since(t_iter);
      tr.iters.push_back(row);
      tr.status = "max_iter";
      break;
    }

    bool took_newton = false;
    const bool switch_ok =
        enable_newton &&
        (cfg.switch_mode == SwitchMode::strict
             ? check_switch(x, step.x_bar)
             : check_relaxed_switch(x, step.x_bar, k, cfg.eta1, cfg.eta2));

    if (switch_ok) {
      const auto t_newton = Clock::now();
      const SupportPair sup = supports_of(x);
      if (!sup.S.empty()) {
        const double reg = std::pow(step.residual, cfg.sigma);
        const GkOracle Gk =
            build_Gk(spec, x, reg, cfg.g_variant, cfg.b1, cfg.b2);
        auto [bs, qp] = reduce_and_aggregate(spec, x, sup, Gk);
        const double r = step.residual;
        const double tol_abs = 0.5 * std::min(1.0 / step.mu_bar, 1.0) *
                               std::min(r, std::pow(r, 1.0 + cfg.varsigma));
        const InnerSolveResult inner =
            solve_subproblem_inexact(qp, tol_abs, 0.0);
        if (inner.converged) {
          // certificate recomputed from scratch at the returned point
          const double theta_dec = qp.objective(inner.w);
          const double res_R = box_stationarity_residual(
              inner.w, qp.grad_at(inner.w), qp.lo, qp.hi, qp.L);
          const Vector y = lift_blocks(spec.n, bs, inner.w);
          const Vector d = y - x;
          const double dnorm = d.norm();
          if (dnorm > 0.0 && theta_dec <= 0.0 && res_R <= tol_abs) {
            const double fx = spec.loss.value(x);
            const double gd = spec.loss.gradient(x).dot(d);
            if (gd < 0.0) {
              const ArmijoResult ar =
                  armijo_newton(spec.loss, x, d, cfg.rho, cfg.beta, fx, gd);
              if (ar.ok) {
                const Vector x_new = combine_on_blocks(x, ar.alpha, bs, inner.w);
                const double F_new = eval_F(spec, x_new);
                if (F_new < Fx) {
                  x = x_new;
                  took_newton = true;
                  row.kind = StepKind::Newton;
                  row.alpha_step = ar.alpha;
                  row.inner_iters = inner.inner_iters;
                  row.cert = NewtonCert{theta_dec, res_R, tol_abs};
                }
              }
            }
          }
        }
      }
      tr.newton_time_ms += ms_since(t_newton);
    }

    if (!took_newton) x = step.x_bar;  // PG step (or Newton fallback)

    if (took_newton)
      ++tr.newton_steps;
    else
      ++tr.pg_steps;
    row.t_ms = ms_since(t_iter);
    tr.iters.push_back(row);
    ++k;
  }

  tr.x = x;
  tr.F = eval_F(spec, x);
  const SupportPair sup = supports_of(x);
  tr.xNnz = static_cast<int>(sup.S.size());
  tr.BxNnz = static_cast<int>(sup.T.size());
  tr.residual_inf_final = tr.iters.back().residual_inf;
  tr.mu_bar_final = tr.iters.back().mu_bar;
  tr.total_time_ms = ms_since(t_start);
  return tr;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("config: epsilon < 0");
  if (max_iter < 0) throw std::invalid_argument("config: max_iter < 0");
  if (!(alpha > 0.0)) throw std::invalid_argument("config: alpha <= 0");
  if (!(rho > 0.0 && rho < 0.5)) throw std::invalid_argument("config: rho outside (0, 1/2)");
  // sigma = 1/2 is admitted: it is the published default even though the
  // stated range is the open interval
  if (!(sigma > 0.0 && sigma <= 0.5))
    throw std::invalid_argument("config: sigma outside (0, 1/2]");
  if (!(varsigma > sigma && varsigma <= 1.0))
    throw std::invalid_argument("config: varsigma outside (sigma, 1]");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("config: beta outside (0, 1)");
  if (!(tau > 1.0)) throw std::invalid_argument("config: tau <= 1");
  if (!(b1 > 0.0)) throw std::invalid_argument("config: b1 <= 0");
  if (!(b2 >= 1.0)) throw std::invalid_argument("config: b2 < 1");
  if (!(mu_min > 0.0 && mu_min <= mu_max))
    throw std::invalid_argument("config: bad mu interval");
  if (!(eta1 >= 0.0 && eta2 >= 0.0))
    throw std::invalid_argument("config: negative eta");
}

SolveTrace pgipn_solve(const ProblemSpec& spec, const SolverConfig& config) {
  return run_loop(spec, config, true);
}

SolveTrace pg_solve(const ProblemSpec& spec, const SolverConfig& config) {
  return run_loop(spec, config, false);
}

double psnr(const Vector& x, const Vector& x_true) {
  if (x.size() != x_true.size())
    throw std::invalid_argument("psnr: length mismatch");
  const double err = (x_true - x).squaredNorm();
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(static_cast<double>(x.size()) / err);
}

namespace {

// piecewise-constant ground truth with nblocks segments; zero blocks mixed in
Vector piecewise_truth(SplitMix64& rng, Eigen::Index n, int nblocks,
                       double vmin, double vmax, bool signed_values) {
  Vector x = Vector::Zero(n);
  std::vector<Eigen::Index> cuts;
  cuts.push_back(0);
  for (int j = 1; j < nblocks; ++j)
    cuts.push_back(static_cast<Eigen::Index>(
        std::llround(static_cast<double>(j) * static_cast<double>(n) / nblocks +
                     rng.uniform(-0.03, 0.03) * static_cast<double>(n))));
  cuts.push_back(n);
  std::sort(cuts.begin(), cuts.end());
  for (auto& c : cuts) c = std::clamp<Eigen::Index>(c, 0, n);

  double prev = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
    double v;
    do {
      if (rng.uniform() < 0.35) {
        v = 0.0;
      } else {
        v = rng.uniform(vmin, vmax);
        if (signed_values && rng.uniform() < 0.5) v = -v;
      }
    } while (v == prev);  // adjacent blocks must differ
    for (Eigen::Index i = cuts[j]; i < cuts[j + 1]; ++i) x[i] = v;
    if (cuts[j] < cuts[j + 1]) prev = v;
  }
  return x;
}

Vector gaussian_noise(SplitMix64& rng, Eigen::Index m, double stddev) {
  Vector e(m);
  for (Eigen::Index i = 0; i < m; ++i) e[i] = stddev * rng.normal();
  return e;
}

// 1D Gaussian blur taps, truncated and normalized to sum 1
std::vector<double> blur_kernel(double sigma_blur, int width) {
  const int half = width / 2;
  std::vector<double> g(static_cast<std::size_t>(width));
  double sum = 0.0;
  for (int j = -half; j <= half; ++j) {
    g[static_cast<std::size_t>(j + half)] =
        std::exp(-0.5 * (j * j) / (sigma_blur * sigma_blur));
    sum += g[static_cast<std::size_t>(j + half)];
  }
  for (double& v : g) v /= sum;
  return g;
}

}  // namespace

BenchInstance generate_benchmarks(BenchKind kind, std::uint64_t seed,
                                  BenchSizes sizes) {
  SplitMix64 root(seed);
  SplitMix64 rng = root.fork(static_cast<std::uint64_t>(kind));
  BenchInstance inst;

  switch (kind) {
    case BenchKind::sparse_regression: {
      const Eigen::Index m = sizes.m > 0 ? sizes.m : 100;
      const Eigen::Index n = sizes.n > 0 ? sizes.n : 200;
      const double snr = sizes.noise > 0.0 ? sizes.noise : 10.0;
      if (n < 10) throw std::invalid_argument("bench: n too small");

      Matrix A(m, n);
      const double scale = 1.0 / std::sqrt(static_cast<double>(m));
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < n; ++j) A(i, j) = scale * rng.normal();

      inst.x_true = piecewise_truth(rng, n, 10, 0.5, 1.5, true);
      Vector signal = A * inst.x_true;
      const double noise_var =
          signal.squaredNorm() / (static_cast<double>(m) * snr);
      Vector b = signal + gaussian_noise(rng, m, std::sqrt(noise_var));

      ProxParams p;
      p.l = Vector::Constant(n, -2.0);
      p.u = Vector::Constant(n, 2.0);
      const double lam = 0.1 * (A.transpose() * b).cwiseAbs().maxCoeff();
      p.lambda1 = lam;
      p.lambda2 = 0.05 * lam;
      inst.spec = ProblemSpec{
          LossOracle::least_squares(DesignMatrix(std::move(A)), std::move(b)),
          std::move(p), n};
      inst.descr = "sparse_regression";
      break;
    }

    case BenchKind::deblur_1d: {
      const Eigen::Index n = sizes.n > 0 ? sizes.n : 1024;
      const double eps = sizes.noise >= 0.0 ? sizes.noise : 0.01;
      const auto g = blur_kernel(4.0, 9);
      const int half = 4;

      std::vector<Eigen::Triplet<double>> trips;
      for (Eigen::Index i = 0; i < n; ++i)
        for (int j = -half; j <= half; ++j) {
          const Eigen::Index c = i + j;
          if (c < 0 || c >= n) continue;
          trips.emplace_back(i, c, g[static_cast<std::size_t>(j + half)]);
        }
      SpMatrix A(n, n);
      A.setFromTriplets(trips.begin(), trips.end());

      inst.x_true = piecewise_truth(rng, n, 12, 0.2, 1.0, false);
      Vector b = A * inst.x_true + gaussian_noise(rng, n, eps);

      ProxParams p;
      p.l = Vector::Zero(n);
      p.u = Vector::Ones(n);
      const double lam =
          0.0005 * (A.transpose() * b).cwiseAbs().maxCoeff();
      p.lambda1 = lam;
      p.lambda2 = lam;
      inst.spec = ProblemSpec{
          LossOracle::least_squares(DesignMatrix(std::move(A)), std::move(b)),
          std::move(p), n};
      inst.descr = "deblur_1d";
      break;
    }

    case BenchKind::deblur_2d: {
      const Eigen::Index side =
          sizes.n > 0
              ? static_cast<Eigen::Index>(std::llround(std::sqrt(double(sizes.n))))
              : 32;
      const Eigen::Index n = side * side;
      const double eps = sizes.noise >= 0.0 ? sizes.noise : 0.01;
      const auto g = blur_kernel(4.0, 9);
      const int half = 4;

      std::vector<Eigen::Triplet<double>> trips;
      for (Eigen::Index r = 0; r < side; ++r)
        for (Eigen::Index c = 0; c < side; ++c)
          for (int dr = -half; dr <= half; ++dr)
            for (int dc = -half; dc <= half; ++dc) {
              const Eigen::Index rr = r + dr, cc = c + dc;
              if (rr < 0 || rr >= side || cc < 0 || cc >= side) continue;
              trips.emplace_back(r * side + c, rr * side + cc,
                                 g[static_cast<std::size_t>(dr + half)] *
                                     g[static_cast<std::size_t>(dc + half)]);
            }
      SpMatrix A(n, n);
      A.setFromTriplets(trips.begin(), trips.end());

      // blocky image: constant rectangles on a zero background
      Vector xt = Vector::Zero(n);
      const int nrect = 4;
      for (int t = 0; t < nrect; ++t) {
        const auto r0 = static_cast<Eigen::Index>(rng.uniform(0.0, 0.6) * side);
        const auto c0 = static_cast<Eigen::Index>(rng.uniform(0.0, 0.6) * side);
        const auto h = static_cast<Eigen::Index>(rng.uniform(0.2, 0.4) * side);
        const auto w = static_cast<Eigen::Index>(rng.uniform(0.2, 0.4) * side);
        const double v = rng.uniform(0.3, 1.0);
        for (Eigen::Index r = r0; r < std::min(side, r0 + h); ++r)
          for (Eigen::Index c = c0; c < std::min(side, c0 + w); ++c)
            xt[r * side + c] = v;
      }
      inst.x_true = xt;
      Vector b = A * inst.x_true + gaussian_noise(rng, n, eps);

      ProxParams p;
      p.l = Vector::Zero(n);
      p.u = Vector::Ones(n);
      const double lam =
          0.0005 * (A.transpose() * b).cwiseAbs().maxCoeff();
      p.lambda1 = lam;
      p.lambda2 = lam;
      inst.spec = ProblemSpec{
          LossOracle::least_squares(DesignMatrix(std::move(A)), std::move(b)),
          std::move(p), n};
      inst.descr = "deblur_2d";
      break;
    }

    case BenchKind::phoneme_like: {
      const Eigen::Index m = sizes.m > 0 ? sizes.m : 240;
      const Eigen::Index n = sizes.n > 0 ? sizes.n : 150;
      const double noise = sizes.noise >= 0.0 ? sizes.noise : 0.05;

      // rows look like smoothed spectra: moving-average of white noise
      Matrix A(m, n);
      const int win = 8;
      Vector raw(n + win);
      for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < raw.size(); ++j) raw[j] = rng.normal();
        for (Eigen::Index j = 0; j < n; ++j) {
          double s = 0.0;
          for (int t = 0; t < win; ++t) s += raw[j + t];
          A(i, j) = s / win;
        }
      }

      inst.x_true = piecewise_truth(rng, n, 8, 0.3, 1.0, true);
      // heavy-tailed noise: scaled Student-t with 3 degrees of freedom
      Vector e(m);
      for (Eigen::Index i = 0; i < m; ++i) {
        const double z = rng.normal();
        double chi = 0.0;
        for (int t = 0; t < 3; ++t) {
          const double u = rng.normal();
          chi += u * u;
        }
        e[i] = noise * z / std::sqrt(chi / 3.0);
      }
      Vector b = A * inst.x_true + e;

      ProxParams p;
      p.l = Vector::Constant(n, -1.0);
      p.u = Vector::Constant(n, 1.0);
      const double lam1 =
          1e-3 * (A.transpose() * b).cwiseAbs().maxCoeff();
      p.lambda1 = lam1;
      p.lambda2 = 0.1 * lam1;
      inst.spec = ProblemSpec{
          LossOracle::student_t(DesignMatrix(std::move(A)), std::move(b), 1.0),
          std::move(p), n};
      inst.descr = "phoneme_like";
      break;
    }
  }
  return inst;
}

}  // namespace fusedl0
