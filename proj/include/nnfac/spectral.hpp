#pragma once

#include <Eigen/Core>

#include "nnfac/stacked_factor.hpp"

namespace nnfac {

// Relative threshold below which a singular value counts as zero
// (backward-error scale of a double-precision SVD).
inline constexpr double kRankRelTol = 1e-8;

// Thin SVD, A = left * diag(singulars) * right^T, with singulars sorted
// nonincreasing. Columns of left/right are orthonormal and the reconstruction
// error is at most 1e-10 * ||A||_F; both are verified after the fact and a
// ConvergenceError carrying the residual is thrown if the backend failed to
// deliver them.
struct Svd {
  Matrix left;
  Vector singulars;
  Matrix right;
};

Svd svd(const Matrix& a);

// Number of singular values above rel_tol times the largest.
Eigen::Index numerical_rank(const Vector& singulars,
                            double rel_tol = kRankRelTol);

// rho(A): the smallest singular value above rel_tol * sigma_1. Throws
// std::invalid_argument on the zero matrix.
double smallest_nonzero_singular(const Matrix& a, double rel_tol = kRankRelTol);

double spectral_norm(const Matrix& a);
double nuclear_norm(const Matrix& a);

}  // namespace nnfac
