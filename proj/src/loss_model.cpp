#include "nnfac/loss_model.hpp"

#include <set>
#include <stdexcept>

namespace nnfac {

QuadraticSensingLoss::QuadraticSensingLoss(const Matrix& stacked_sensing,
                                           Vector observations)
    : b_(std::move(observations)) {
  require_finite(stacked_sensing, "QuadraticSensingLoss sensing stack");
  require_finite(b_, "QuadraticSensingLoss observations");
  const Eigen::Index n = b_.size();
  if (n < 1) {
    throw std::invalid_argument(
        "QuadraticSensingLoss: at least one measurement required");
  }
  if (stacked_sensing.rows() % n != 0) {
    throw std::invalid_argument(
        "QuadraticSensingLoss: stacked sensing rows not divisible by the "
        "number of observations");
  }
  p_ = stacked_sensing.rows() / n;
  q_ = stacked_sensing.cols();
  op_.resize(n, p_ * q_);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Matrix block = stacked_sensing.middleRows(i * p_, p_);
    op_.row(i) = Eigen::Map<const Vector>(block.data(), p_ * q_);
  }
}

Vector QuadraticSensingLoss::apply_operator(const Matrix& x) const {
  return op_ * Eigen::Map<const Vector>(x.data(), p_ * q_);
}

Matrix QuadraticSensingLoss::apply_adjoint(const Vector& y) const {
  const Vector v = op_.transpose() * y;
  return Eigen::Map<const Matrix>(v.data(), p_, q_);
}

double QuadraticSensingLoss::value(const Matrix& x) const {
  require_shape(x, "QuadraticSensingLoss::value");
  return 0.5 * (apply_operator(x) - b_).squaredNorm();
}

Matrix QuadraticSensingLoss::grad(const Matrix& x) const {
  require_shape(x, "QuadraticSensingLoss::grad");
  return apply_adjoint(apply_operator(x) - b_);
}

Matrix QuadraticSensingLoss::hess_apply(const Matrix& /*x*/, const Matrix& d) const {
  require_shape(d, "QuadraticSensingLoss::hess_apply");
  return apply_adjoint(apply_operator(d));
}

double QuadraticSensingLoss::hess_bilinear(const Matrix& /*x*/, const Matrix& g,
                                           const Matrix& h) const {
  require_shape(g, "QuadraticSensingLoss::hess_bilinear");
  require_shape(h, "QuadraticSensingLoss::hess_bilinear");
  return apply_operator(g).dot(apply_operator(h));
}

IdentityQuadraticLoss::IdentityQuadraticLoss(Matrix target)
    : target_(std::move(target)) {
  require_finite(target_, "IdentityQuadraticLoss target");
}

double IdentityQuadraticLoss::value(const Matrix& x) const {
  require_shape(x, "IdentityQuadraticLoss::value");
  return 0.5 * (x - target_).squaredNorm();
}

Matrix IdentityQuadraticLoss::grad(const Matrix& x) const {
  require_shape(x, "IdentityQuadraticLoss::grad");
  return x - target_;
}

Matrix IdentityQuadraticLoss::hess_apply(const Matrix& /*x*/,
                                         const Matrix& d) const {
  require_shape(d, "IdentityQuadraticLoss::hess_apply");
  return d;
}

double IdentityQuadraticLoss::hess_bilinear(const Matrix& /*x*/,
                                            const Matrix& g,
                                            const Matrix& h) const {
  require_shape(g, "IdentityQuadraticLoss::hess_bilinear");
  require_shape(h, "IdentityQuadraticLoss::hess_bilinear");
  return g.cwiseProduct(h).sum();
}

WeightedFrobeniusLoss::WeightedFrobeniusLoss(Matrix weights, Matrix target)
    : weights_(std::move(weights)), target_(std::move(target)) {
  require_finite(weights_, "WeightedFrobeniusLoss weights");
  require_finite(target_, "WeightedFrobeniusLoss target");
  if (weights_.rows() != target_.rows() || weights_.cols() != target_.cols()) {
    throw std::invalid_argument(
        "WeightedFrobeniusLoss: weights/target shape mismatch");
  }
  if ((weights_.array() <= 0.0).any()) {
    throw std::invalid_argument(
        "WeightedFrobeniusLoss: weights must be strictly positive");
  }
  weights_sq_ = weights_.cwiseProduct(weights_);
}

double WeightedFrobeniusLoss::value(const Matrix& x) const {
  require_shape(x, "WeightedFrobeniusLoss::value");
  return 0.5 * weights_.cwiseProduct(x - target_).squaredNorm();
}

Matrix WeightedFrobeniusLoss::grad(const Matrix& x) const {
  require_shape(x, "WeightedFrobeniusLoss::grad");
  return weights_sq_.cwiseProduct(x - target_);
}

Matrix WeightedFrobeniusLoss::hess_apply(const Matrix& /*x*/,
                                         const Matrix& d) const {
  require_shape(d, "WeightedFrobeniusLoss::hess_apply");
  return weights_sq_.cwiseProduct(d);
}

double WeightedFrobeniusLoss::hess_bilinear(const Matrix& /*x*/,
                                            const Matrix& g,
                                            const Matrix& h) const {
  require_shape(g, "WeightedFrobeniusLoss::hess_bilinear");
  require_shape(h, "WeightedFrobeniusLoss::hess_bilinear");
  return weights_sq_.cwiseProduct(g).cwiseProduct(h).sum();
}

MaskedCompletionLoss::MaskedCompletionLoss(
    Eigen::Index p, Eigen::Index q,
    std::vector<std::pair<Eigen::Index, Eigen::Index>> mask, Vector observed)
    : p_(p), q_(q), mask_(std::move(mask)), observed_(std::move(observed)) {
  if (p_ < 1 || q_ < 1) {
    throw std::invalid_argument("MaskedCompletionLoss: invalid shape");
  }
  if (static_cast<Eigen::Index>(mask_.size()) != observed_.size()) {
    throw std::invalid_argument(
        "MaskedCompletionLoss: mask and observation counts differ");
  }
  require_finite(observed_, "MaskedCompletionLoss observations");
  std::set<std::pair<Eigen::Index, Eigen::Index>> seen;
  for (const auto& [i, j] : mask_) {
    if (i < 0 || i >= p_ || j < 0 || j >= q_) {
      throw std::invalid_argument(
          "MaskedCompletionLoss: mask index out of range");
    }
    if (!seen.insert({i, j}).second) {
      throw std::invalid_argument(
          "MaskedCompletionLoss: duplicate mask index");
    }
  }
}

double MaskedCompletionLoss::value(const Matrix& x) const {
  require_shape(x, "MaskedCompletionLoss::value");
  double acc = 0.0;
  for (std::size_t k = 0; k < mask_.size(); ++k) {
    const double d = x(mask_[k].first, mask_[k].second) -
                     observed_(static_cast<Eigen::Index>(k));
    acc += d * d;
  }
  return 0.5 * acc;
}

Matrix MaskedCompletionLoss::grad(const Matrix& x) const {
  require_shape(x, "MaskedCompletionLoss::grad");
  Matrix g = Matrix::Zero(p_, q_);
  for (std::size_t k = 0; k < mask_.size(); ++k) {
    const auto& [i, j] = mask_[k];
    g(i, j) = x(i, j) - observed_(static_cast<Eigen::Index>(k));
  }
  return g;
}

Matrix MaskedCompletionLoss::hess_apply(const Matrix& /*x*/,
                                        const Matrix& d) const {
  require_shape(d, "MaskedCompletionLoss::hess_apply");
  Matrix out = Matrix::Zero(p_, q_);
  for (const auto& [i, j] : mask_) out(i, j) = d(i, j);
  return out;
}

double MaskedCompletionLoss::hess_bilinear(const Matrix& /*x*/,
                                           const Matrix& g,
                                           const Matrix& h) const {
  require_shape(g, "MaskedCompletionLoss::hess_bilinear");
  require_shape(h, "MaskedCompletionLoss::hess_bilinear");
  double acc = 0.0;
  for (const auto& [i, j] : mask_) acc += g(i, j) * h(i, j);
  return acc;
}

}  // namespace nnfac
