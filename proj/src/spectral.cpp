#include "nnfac/spectral.hpp"

#include <stdexcept>

#include <Eigen/SVD>

#include "nnfac/errors.hpp"

namespace nnfac {

Svd svd(const Matrix& a) {
  require_finite(a, "svd");
  Eigen::JacobiSVD<Matrix> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Svd out{solver.matrixU(), solver.singularValues(), solver.matrixV()};

  const double scale = a.norm();
  const double recon =
      (a - out.left * out.singulars.asDiagonal() * out.right.transpose())
          .norm();
  const Eigen::Index k = out.singulars.size();
  const double ortho_left =
      (out.left.transpose() * out.left - Matrix::Identity(k, k)).norm();
  const double ortho_right =
      (out.right.transpose() * out.right - Matrix::Identity(k, k)).norm();
  const double residual =
      recon / (scale > 0.0 ? scale : 1.0) + ortho_left + ortho_right;
  if (solver.info() != Eigen::Success || recon > 1e-10 * (scale > 0.0 ? scale : 1.0) ||
      ortho_left > 1e-10 || ortho_right > 1e-10) {
    throw ConvergenceError("svd failed to meet its accuracy contract", residual,
                           0, a);
  }
  return out;
}

Eigen::Index numerical_rank(const Vector& singulars, double rel_tol) {
  if (singulars.size() == 0) return 0;
  const double cutoff = rel_tol * singulars(0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < singulars.size(); ++i) {
    if (singulars(i) > cutoff) ++rank;
  }
  return rank;
}

double smallest_nonzero_singular(const Matrix& a, double rel_tol) {
  if (a.norm() == 0.0) {
    throw std::invalid_argument("rho undefined for zero matrix");
  }
  const Vector s = svd(a).singulars;
  const Eigen::Index rank = numerical_rank(s, rel_tol);
  if (rank == 0) {
    throw std::invalid_argument("rho undefined for zero matrix");
  }
  return s(rank - 1);
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0 || a.norm() == 0.0) return 0.0;
  return svd(a).singulars(0);
}

double nuclear_norm(const Matrix& a) {
  if (a.size() == 0 || a.norm() == 0.0) return 0.0;
  return svd(a).singulars.sum();
}

}  // namespace nnfac
