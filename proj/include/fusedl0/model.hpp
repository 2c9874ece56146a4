#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <functional>

#include "fusedl0/prox.hpp"

namespace fusedl0 {

using Matrix = Eigen::MatrixXd;
using SpMatrix = Eigen::SparseMatrix<double>;

enum class LossKind { least_squares, student_t, custom };

// Design matrix with dense or sparse storage behind one product interface.
class DesignMatrix {
 public:
  DesignMatrix() = default;
  explicit DesignMatrix(Matrix A) : dense_(std::move(A)), sparse_(), is_sparse_(false) {}
  explicit DesignMatrix(SpMatrix A) : dense_(), sparse_(std::move(A)), is_sparse_(true) {}

  Eigen::Index rows() const { return is_sparse_ ? sparse_.rows() : dense_.rows(); }
  Eigen::Index cols() const { return is_sparse_ ? sparse_.cols() : dense_.cols(); }
  bool is_sparse() const { return is_sparse_; }
  const Matrix& dense() const { return dense_; }
  const SpMatrix& sparse() const { return sparse_; }

  Vector apply(const Vector& x) const {
    return is_sparse_ ? Vector(sparse_ * x) : Vector(dense_ * x);
  }
  Vector applyT(const Vector& y) const {
    return is_sparse_ ? Vector(sparse_.transpose() * y) : Vector(dense_.transpose() * y);
  }

 private:
  Matrix dense_;
  SpMatrix sparse_;
  bool is_sparse_ = false;
};

// componentwise Student-t pieces: value log(1 + r^2/nu), first 2r/(nu + r^2),
// second 2(nu - r^2)/(nu + r^2)^2
void student_t_derivatives(const Vector& r, double nu, Vector& value,
                           Vector& first, Vector& second);

// Smooth loss f. Generalized linear kinds evaluate f(x) = h(Ax - b) with
// separable h; the custom kind carries explicit value/gradient/Hessian
// callbacks (needed only by the G3 Hessian variant).
class LossOracle {
 public:
  static LossOracle least_squares(DesignMatrix A, Vector b);
  static LossOracle student_t(DesignMatrix A, Vector b, double nu);
  static LossOracle custom(Eigen::Index n,
                           std::function<double(const Vector&)> value,
                           std::function<Vector(const Vector&)> gradient,
                           std::function<Matrix(const Vector&)> hessian);

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;

  // h''(Ax - b) componentwise; generalized linear kinds only
  Vector hessian_inner_diag(const Vector& x) const;
  // dense Hessian of f at x (A^T diag(h'') A for GLM kinds)
  Matrix hessian_dense(const Vector& x) const;

  bool is_glm() const { return kind_ != LossKind::custom; }
  LossKind kind() const { return kind_; }
  double nu() const { return nu_; }
  Eigen::Index dim() const { return n_; }
  const DesignMatrix& design() const { return A_; }
  const Vector& offset() const { return b_; }

 private:
  LossKind kind_ = LossKind::least_squares;
  Eigen::Index n_ = 0;
  DesignMatrix A_;
  Vector b_;
  double nu_ = 1.0;
  std::function<double(const Vector&)> value_fn_;
  std::function<Vector(const Vector&)> grad_fn_;
  std::function<Matrix(const Vector&)> hess_fn_;
};

struct ProblemSpec {
  LossOracle loss;
  ProxParams prox_params;
  Eigen::Index n = 0;
};

// F(x) = f(x) + lambda1*||Bhat x||_0 + lambda2*||x||_0, +inf off the box;
// zeros are detected by exact comparison
double eval_F(const ProblemSpec& spec, const Vector& x);

// sup-curvature of h times sigma_max(A)^2, the latter by power iteration on
// A^T A to relative tolerance 1e-3
double estimate_L1(const ProblemSpec& spec);

}  // namespace fusedl0
