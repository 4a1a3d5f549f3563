#pragma once

#include <vector>

#include "nnfac/problem.hpp"
#include "nnfac/stacked_factor.hpp"

namespace nnfac {

// Ground-truth side: solve min f(X) + lambda ||X||_* directly by proximal
// gradient with singular-value soft-thresholding, at desk scale, and check the
// first-order optimality conditions.

// Prox of tau ||.||_*: soft-threshold the singular values of X by tau.
Matrix svt(const Matrix& x, double tau);

struct KktReport {
  // lambda - ||grad f(X)|| (spectral norm); nonnegative at an optimum.
  double spectral_slack;
  // max(||grad f(X) Q + lambda P||_F, ||grad f(X)^T P + lambda Q||_F)
  // normalized by 1 + ||X||_F, with P, Q from the compact SVD of X.
  double subgradient_residual;
  bool pass;
};

KktReport kkt_check(const Problem& problem, const Matrix& x, double tol);

struct ConvexSolution {
  Matrix x_star;
  Eigen::Index rank_star;
  double kkt_spectral_slack;
  double subgradient_residual;
  bool kkt_pass;
  long iterations;
  double objective;
  // f(X_k) + lambda ||X_k||_* per iteration; nonincreasing.
  std::vector<double> objective_trace;
};

// Proximal gradient from X_0 = 0 with iterates
// X_{k+1} = svt(X_k - step * grad f(X_k), step * lambda), stopping when
// ||X_{k+1} - X_k||_F <= tol * step. A nonpositive step requests the default
// 0.9 / M_hat with M_hat sampled at full rank. Throws ConvergenceError (with
// the last iterate) past max_iters.
ConvexSolution solve_convex(const Problem& problem, double step, double tol,
                            long max_iters, double kkt_tol = 1e-6);

}  // namespace nnfac
