#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "nnfac/stacked_factor.hpp"

namespace nnfac {

// Convex loss f over p x q matrices, exposed through value, gradient, and the
// Hessian both as a bilinear form and as a linear map. Instances are immutable
// and safe to share across threads.
class LossModel {
 public:
  virtual ~LossModel() = default;

  virtual Eigen::Index rows() const = 0;  // p
  virtual Eigen::Index cols() const = 0;  // q

  virtual double value(const Matrix& x) const = 0;
  virtual Matrix grad(const Matrix& x) const = 0;

  // [Hess f(x)](d) as a matrix.
  virtual Matrix hess_apply(const Matrix& x, const Matrix& d) const = 0;

  // [Hess f(x)](g, h); the default pairs hess_apply with the trace inner
  // product, concrete losses override when a cheaper form exists.
  virtual double hess_bilinear(const Matrix& x, const Matrix& g,
                               const Matrix& h) const {
    return hess_apply(x, g).cwiseProduct(h).sum();
  }

  virtual std::string name() const = 0;

 protected:
  void require_shape(const Matrix& x, const char* what) const {
    if (x.rows() != rows() || x.cols() != cols()) {
      throw std::invalid_argument(std::string(what) +
                                  ": argument shape does not match the loss");
    }
  }
};

using LossPtr = std::shared_ptr<const LossModel>;

// f(X) = 1/2 sum_i (<A_i, X> - b_i)^2 for sensing matrices A_1..A_n supplied
// as a vertical stack of n p x q blocks. Internally the operator is kept as an
// n x (p*q) matrix acting on vec(X).
class QuadraticSensingLoss : public LossModel {
 public:
  QuadraticSensingLoss(const Matrix& stacked_sensing, Vector observations);

  Eigen::Index rows() const override { return p_; }
  Eigen::Index cols() const override { return q_; }
  Eigen::Index n_measurements() const { return b_.size(); }

  double value(const Matrix& x) const override;
  Matrix grad(const Matrix& x) const override;
  Matrix hess_apply(const Matrix& x, const Matrix& d) const override;
  double hess_bilinear(const Matrix& x, const Matrix& g,
                       const Matrix& h) const override;

  std::string name() const override { return "quadratic_sensing"; }

 private:
  Vector apply_operator(const Matrix& x) const;
  Matrix apply_adjoint(const Vector& y) const;

  Eigen::Index p_ = 0, q_ = 0;
  Matrix op_;  // n x (p*q), row i = vec(A_i)^T
  Vector b_;
};

// f(X) = 1/2 ||X - B||_F^2. Closed-form everything; its regularized optimum
// is singular-value soft-thresholding of B, which makes it the reference
// instance for end-to-end checks.
class IdentityQuadraticLoss : public LossModel {
 public:
  explicit IdentityQuadraticLoss(Matrix target);

  Eigen::Index rows() const override { return target_.rows(); }
  Eigen::Index cols() const override { return target_.cols(); }
  const Matrix& target() const { return target_; }

  double value(const Matrix& x) const override;
  Matrix grad(const Matrix& x) const override;
  Matrix hess_apply(const Matrix& x, const Matrix& d) const override;
  double hess_bilinear(const Matrix& x, const Matrix& g,
                       const Matrix& h) const override;

  std::string name() const override { return "identity_quadratic"; }

 private:
  Matrix target_;
};

// f(X) = 1/2 ||Omega .* (X - B)||_F^2 with strictly positive weights. Badly
// spread weights break the well-conditioning the landscape results need, which
// is exactly what the certifier uses this loss for.
class WeightedFrobeniusLoss : public LossModel {
 public:
  WeightedFrobeniusLoss(Matrix weights, Matrix target);

  Eigen::Index rows() const override { return target_.rows(); }
  Eigen::Index cols() const override { return target_.cols(); }
  const Matrix& weights() const { return weights_; }

  double value(const Matrix& x) const override;
  Matrix grad(const Matrix& x) const override;
  Matrix hess_apply(const Matrix& x, const Matrix& d) const override;
  double hess_bilinear(const Matrix& x, const Matrix& g,
                       const Matrix& h) const override;

  std::string name() const override { return "weighted_frobenius"; }

 private:
  Matrix weights_;
  Matrix weights_sq_;
  Matrix target_;
};

// f(X) = 1/2 sum_{(i,j) in mask} (X_ij - b_ij)^2. A quadratic completion
// stand-in; nothing guarantees it is restricted well-conditioned, the
// certifier just reports what it measures.
class MaskedCompletionLoss : public LossModel {
 public:
  MaskedCompletionLoss(Eigen::Index p, Eigen::Index q,
                       std::vector<std::pair<Eigen::Index, Eigen::Index>> mask,
                       Vector observed);

  Eigen::Index rows() const override { return p_; }
  Eigen::Index cols() const override { return q_; }

  double value(const Matrix& x) const override;
  Matrix grad(const Matrix& x) const override;
  Matrix hess_apply(const Matrix& x, const Matrix& d) const override;
  double hess_bilinear(const Matrix& x, const Matrix& g,
                       const Matrix& h) const override;

  std::string name() const override { return "masked_completion"; }

 private:
  Eigen::Index p_ = 0, q_ = 0;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> mask_;
  Vector observed_;
};

}  // namespace nnfac
