#include "fusedl0/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "fusedl0/rng.hpp"

namespace fusedl0 {

void student_t_derivatives(const Vector& r, double nu, Vector& value,
                           Vector& first, Vector& second) {
  if (!(nu > 0.0)) throw std::invalid_argument("student_t: nu must be positive");
  const Eigen::Index m = r.size();
  value.resize(m);
  first.resize(m);
  second.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double ri = r[i];
    const double den = nu + ri * ri;
    value[i] = std::log1p(ri * ri / nu);
    first[i] = 2.0 * ri / den;
    second[i] = 2.0 * (nu - ri * ri) / (den * den);
  }
}

LossOracle LossOracle::least_squares(DesignMatrix A, Vector b) {
  if (A.rows() != b.size())
    throw std::invalid_argument("loss: A rows do not match b");
  LossOracle o;
  o.kind_ = LossKind::least_squares;
  o.n_ = A.cols();
  o.A_ = std::move(A);
  o.b_ = std::move(b);
  return o;
}

LossOracle LossOracle::student_t(DesignMatrix A, Vector b, double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("loss: nu must be positive");
  if (A.rows() != b.size())
    throw std::invalid_argument("loss: A rows do not match b");
  LossOracle o;
  o.kind_ = LossKind::student_t;
  o.n_ = A.cols();
  o.A_ = std::move(A);
  o.b_ = std::move(b);
  o.nu_ = nu;
  return o;
}

LossOracle LossOracle::custom(Eigen::Index n,
                              std::function<double(const Vector&)> value,
                              std::function<Vector(const Vector&)> gradient,
                              std::function<Matrix(const Vector&)> hessian) {
  LossOracle o;
  o.kind_ = LossKind::custom;
  o.n_ = n;
  o.value_fn_ = std::move(value);
  o.grad_fn_ = std::move(gradient);
  o.hess_fn_ = std::move(hessian);
  return o;
}

double LossOracle::value(const Vector& x) const {
  switch (kind_) {
    case LossKind::least_squares:
      return 0.5 * (A_.apply(x) - b_).squaredNorm();
    case LossKind::student_t: {
      const Vector r = A_.apply(x) - b_;
      double s = 0.0;
      for (Eigen::Index i = 0; i < r.size(); ++i)
        s += std::log1p(r[i] * r[i] / nu_);
      return s;
    }
    case LossKind::custom:
      return value_fn_(x);
  }
  return 0.0;
}

Vector LossOracle::gradient(const Vector& x) const {
  switch (kind_) {
    case LossKind::least_squares:
      return A_.applyT(A_.apply(x) - b_);
    case LossKind::student_t: {
      const Vector r = A_.apply(x) - b_;
      Vector d1(r.size());
      for (Eigen::Index i = 0; i < r.size(); ++i)
        d1[i] = 2.0 * r[i] / (nu_ + r[i] * r[i]);
      return A_.applyT(d1);
    }
    case LossKind::custom:
      return grad_fn_(x);
  }
  return Vector();
}

Vector LossOracle::hessian_inner_diag(const Vector& x) const {
  switch (kind_) {
    case LossKind::least_squares:
      return Vector::Ones(A_.rows());
    case LossKind::student_t: {
      const Vector r = A_.apply(x) - b_;
      Vector d2(r.size());
      for (Eigen::Index i = 0; i < r.size(); ++i) {
        const double den = nu_ + r[i] * r[i];
        d2[i] = 2.0 * (nu_ - r[i] * r[i]) / (den * den);
      }
      return d2;
    }
    case LossKind::custom:
      throw std::invalid_argument("loss: inner diagonal needs a GLM loss");
  }
  return Vector();
}

Matrix LossOracle::hessian_dense(const Vector& x) const {
  if (kind_ == LossKind::custom) return hess_fn_(x);
  const Vector d2 = hessian_inner_diag(x);
  if (A_.is_sparse()) {
    const SpMatrix& S = A_.sparse();
    return Matrix(S.transpose() * d2.asDiagonal() * S);
  }
  const Matrix& D = A_.dense();
  return D.transpose() * d2.asDiagonal() * D;
}

double eval_F(const ProblemSpec& spec, const Vector& x) {
  if (x.size() != spec.n)
    throw std::invalid_argument("eval_F: dimension mismatch");
  const ProxParams& p = spec.prox_params;
  for (Eigen::Index i = 0; i < spec.n; ++i)
    if (x[i] < p.l[i] || x[i] > p.u[i])
      return std::numeric_limits<double>::infinity();
  double F = spec.loss.value(x);
  for (Eigen::Index i = 0; i + 1 < spec.n; ++i)
    if (x[i] != x[i + 1]) F += p.lambda1;
  for (Eigen::Index i = 0; i < spec.n; ++i)
    if (x[i] != 0.0) F += p.lambda2;
  return F;
}

double estimate_L1(const ProblemSpec& spec) {
  const LossOracle& loss = spec.loss;
  if (!loss.is_glm())
    throw std::invalid_argument("estimate_L1: needs a generalized linear loss");

  const Eigen::Index n = loss.dim();
  SplitMix64 rng(0x9d2c5680u);  // fixed start vector
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  v.normalize();

  double lambda = 0.0;
  const int max_iters = 10000;
  for (int it = 0; it < max_iters; ++it) {
    Vector w = loss.design().applyT(loss.design().apply(v));
    const double norm = w.norm();
    if (norm == 0.0) {
      lambda = 0.0;
      break;
    }
    const double lambda_new = v.dot(w);
    w /= norm;
    const bool done = std::abs(lambda_new - lambda) <= 1e-3 * std::abs(lambda_new);
    lambda = lambda_new;
    v = w;
    if (done) break;
    if (it == max_iters - 1)
      throw std::runtime_error("estimate_L1: power iteration did not converge");
  }

  const double sup_curv =
      loss.kind() == LossKind::least_squares ? 1.0 : 2.0 / loss.nu();
  return sup_curv * lambda;
}

}  // namespace fusedl0
