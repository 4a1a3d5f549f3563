#include "nnfac/procrustes.hpp"

#include "nnfac/spectral.hpp"

namespace nnfac {

ProcrustesResult procrustes_distance(const StackedFactor& w1,
                                     const StackedFactor& w2) {
  require_same_shape(w1, w2, "procrustes_distance");
  // Classic orthogonal Procrustes: with W2^T W1 = A S B^T, the minimizer of
  // ||W1 - W2 R||_F over orthogonal R is R = A B^T.
  const Svd cross = svd(w2.W().transpose() * w1.W());
  Matrix rotation = cross.left * cross.right.transpose();
  const double distance = (w1.W() - w2.W() * rotation).norm();
  return {distance, std::move(rotation)};
}

Matrix p_on(const StackedFactor& w1, const StackedFactor& w2) {
  require_same_shape(w1, w2, "p_on");
  const Eigen::Index p = w1.p(), q = w1.q();
  Matrix out = Matrix::Zero(p + q, p + q);
  out.topLeftCorner(p, p) = w1.U() * w2.U().transpose();
  out.bottomRightCorner(q, q) = w1.V() * w2.V().transpose();
  return out;
}

Matrix p_off(const StackedFactor& w1, const StackedFactor& w2) {
  require_same_shape(w1, w2, "p_off");
  const Eigen::Index p = w1.p(), q = w1.q();
  Matrix out = Matrix::Zero(p + q, p + q);
  out.topRightCorner(p, q) = w1.U() * w2.V().transpose();
  out.bottomLeftCorner(q, p) = w1.V() * w2.U().transpose();
  return out;
}

}  // namespace nnfac
