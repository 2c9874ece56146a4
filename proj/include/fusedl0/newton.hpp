#pragma once

#include <vector>

#include "fusedl0/model.hpp"

namespace fusedl0 {

using IndexList = std::vector<Eigen::Index>;

// supports of Bhat*x (T, row indices 0..n-2) and of x (S), by exact zero test
struct SupportPair {
  IndexList T;
  IndexList S;
};

SupportPair supports_of(const Vector& x);

// strict switch: supp(x) == supp(x_bar) and supp(Bhat x) == supp(Bhat x_bar)
bool check_switch(const Vector& x, const Vector& x_bar);

// relaxed switch: support mismatch counts bounded by eta*n/k
bool check_relaxed_switch(const Vector& x, const Vector& x_bar, int k,
                          double eta1, double eta2);

enum class GVariant { G1, G2, G3 };

// Regularized Hessian approximation G_k, deferred to a support set S.
// GLM variants keep the row-weight form G_SS = A_S^T diag(w) A_S + ridge*I;
// G3 materializes the dense restricted Hessian with an eigenvalue shift.
struct GkOracle {
  GVariant variant = GVariant::G2;
  const LossOracle* loss = nullptr;
  Vector row_weights;  // G1/G2
  double ridge = 0.0;  // b1 * reg
  double b2 = 1.0;     // G3 eigenvalue clip factor
  Vector x;            // point, for the G3 Hessian

  Matrix dense(const IndexList& S) const;
};

// reg = ||mu_bar (x - x_bar)||^sigma
GkOracle build_Gk(const ProblemSpec& spec, const Vector& x, double reg,
                  GVariant variant, double b1, double b2);

// Equality chains {x_i = x_{i+1} : i not in T, both in S} grouped into blocks.
struct BlockStructure {
  std::vector<IndexList> members;  // ascending within each block
  Vector lo, hi;                   // per block: max l / min u over members
  Vector sizes;                    // L_j = member count
};

// Aggregated strongly convex box QP over one variable per block:
//   q(w) = g^T (w - w0) + 1/2 (w - w0)^T H (w - w0),  lo <= w <= hi.
// H is materialized densely up to 2000 blocks, otherwise applied as
// M^T diag(row_w) M + ridge * diag(L) with M = A_{.S} P.
struct ReducedQP {
  bool dense = true;
  Matrix H;
  Matrix M_dense;
  SpMatrix M_sparse;
  bool M_is_sparse = false;
  Vector row_w;
  double ridge = 0.0;

  Vector g, w0, lo, hi, L;

  Vector apply(const Vector& v) const;
  Vector grad_at(const Vector& w) const { return g + apply(w - w0); }
  double objective(const Vector& w) const {
    const Vector d = w - w0;
    return g.dot(d) + 0.5 * d.dot(apply(d));
  }
  double lambda_max() const;  // power iteration
};

std::pair<BlockStructure, ReducedQP> reduce_and_aggregate(
    const ProblemSpec& spec, const Vector& x, const SupportPair& supports,
    const GkOracle& Gk);

// dist(0, grad + Range(Btilde^T) + N_box(w)) in the non-aggregated reduced
// coordinates: sqrt(sum_j rho_j^2 / L_j) with rho_j from the aggregated
// gradient and the active bound state of block j
double box_stationarity_residual(const Vector& w, const Vector& grad,
                                 const Vector& lo, const Vector& hi,
                                 const Vector& L);

struct InnerSolveResult {
  Vector w;
  int inner_iters = 0;
  bool converged = false;
};

// monotone accelerated projected gradient from w0, stopped when the box
// stationarity residual falls below tol_abs and the model has not increased
InnerSolveResult solve_subproblem_inexact(const ReducedQP& qp, double tol_abs,
                                          double tol_theta);

struct ArmijoResult {
  double alpha = 1.0;
  int t = 0;
  bool ok = false;
};

// backtracking on the smooth part: smallest t with
// f(x + beta^t d) <= f(x) + rho * beta^t * <grad f(x), d>
ArmijoResult armijo_newton(const LossOracle& loss, const Vector& x,
                           const Vector& d, double rho, double beta, double fx,
                           double gd);

// lift block values back to R^n: y_S from w, y_{S^c} = 0
Vector lift_blocks(Eigen::Index n, const BlockStructure& blocks,
                   const Vector& w);

}  // namespace fusedl0
