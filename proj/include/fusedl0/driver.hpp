#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fusedl0/newton.hpp"

namespace fusedl0 {

enum class MuMode { fixed, interval };
enum class SwitchMode { strict, relaxed };
enum class StopNorm { inf, euclid };

struct SolverConfig {
  double epsilon = 1e-4;
  int max_iter = 5000;
  double alpha = 1e-8;            // PG sufficient decrease
  double sigma = 0.5;             // regularization exponent
  double rho = 1e-4;              // Armijo slope fraction
  double beta = 0.5;              // Armijo backtracking factor
  double varsigma = 2.0 / 3.0;    // inexactness exponent
  double b1 = 1e-3;
  double b2 = 1.0;
  double tau = 2.0;               // PG backtracking factor
  MuMode mu_mode = MuMode::fixed; // fixed: mu_k = L1 / 0.95
  double mu_min = 1e-8;
  double mu_max = 1e8;
  SwitchMode switch_mode = SwitchMode::strict;
  double eta1 = 0.01;
  double eta2 = 0.01;
  GVariant g_variant = GVariant::G2;
  StopNorm stop_norm = StopNorm::inf;
  Vector x0;                      // empty means 0

  void validate() const;  // parameter ranges; throws std::invalid_argument
};

enum class StepKind { PG, Newton };

// per-Newton-step inexactness certificate, recomputed after the inner solve
struct NewtonCert {
  double theta_decrease = 0.0;  // Theta(y) - Theta(x^k), must be <= 0
  double residual_R = 0.0;      // dist(0, d Theta(y)) in reduced coordinates
  double tol_R = 0.0;           // right-hand side of the inexact criterion
};

struct IterRecord {
  int k = 0;
  StepKind kind = StepKind::PG;
  double F = 0.0;             // F(x^k) before the step
  double residual = 0.0;      // mu_bar * ||x^k - x_bar^k||_2
  double residual_inf = 0.0;  // mu_bar * ||x^k - x_bar^k||_inf
  int S_size = 0;
  int T_size = 0;
  double mu_bar = 0.0;
  double alpha_step = 0.0;    // Newton step size (1.0 on PG rows)
  int inner_iters = 0;
  double t_ms = 0.0;
  std::optional<NewtonCert> cert;
};

struct SolveTrace {
  std::vector<IterRecord> iters;
  std::string status;  // "converged" | "max_iter"
  Vector x;
  double F = 0.0;
  int xNnz = 0;
  int BxNnz = 0;
  double residual_inf_final = 0.0;
  double mu_bar_final = 0.0;
  double total_time_ms = 0.0;
  double newton_time_ms = 0.0;
  int pg_steps = 0;
  int newton_steps = 0;
};

SolveTrace pgipn_solve(const ProblemSpec& spec, const SolverConfig& config);

// 10*log10(n / ||x_true - x||^2); +inf on exact match
double psnr(const Vector& x, const Vector& x_true);

enum class BenchKind { sparse_regression, deblur_1d, deblur_2d, phoneme_like };

struct BenchSizes {
  Eigen::Index n = 0;   // 0 means kind default
  Eigen::Index m = 0;
  double noise = -1.0;  // < 0 means kind default
};

struct BenchInstance {
  ProblemSpec spec;
  Vector x_true;
  std::string descr;
};

BenchInstance generate_benchmarks(BenchKind kind, std::uint64_t seed,
                                  BenchSizes sizes = {});

}  // namespace fusedl0
