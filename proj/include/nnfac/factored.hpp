#pragma once

#include <cstdint>

#include "nnfac/problem.hpp"
#include "nnfac/stacked_factor.hpp"

namespace nnfac {

// The factored objective
//   g(W) = f(U V^T) + lambda/2 (||U||_F^2 + ||V||_F^2),  W = [U; V],
// together with its first- and second-order machinery. Everything here is a
// pure function of its inputs.

// X = U V^T.
Matrix phi(const StackedFactor& w);

// (||U||_F^2 + ||V||_F^2) / 2; the tight variational upper bound on the
// nuclear norm of phi(W).
double theta(const StackedFactor& w);

// ||U^T U - V^T V||_F; zero exactly on balanced pairs.
double balance_residual(const StackedFactor& w);

// The symmetric block matrix [lambda I, grad f(X); grad f(X)^T, lambda I].
// Its eigenvalues are lambda +- sigma_i(grad f(X)) plus lambda with the
// remaining multiplicity, and grad g(W) = Xi(X) W.
struct XiMatrix {
  double lambda;
  Matrix grad_f;  // p x q

  Matrix dense() const;
  // Xi * M for a (p+q) x k block matrix M.
  Matrix apply(const Matrix& m) const;
};

XiMatrix xi(const Problem& problem, const Matrix& x);

double g_value(const Problem& problem, const StackedFactor& w);

// grad g(W) = (grad_f(X) V + lambda U, grad_f(X)^T U + lambda V) = Xi(X) W.
StackedFactor g_grad(const Problem& problem, const StackedFactor& w);

// [Hess g(W)](D, D) = <Xi(X), D D^T> + [Hess f(X)](Delta, Delta) with
// Delta = D_U V^T + U D_V^T.
double hess_quadratic_form(const Problem& problem, const StackedFactor& w,
                           const StackedFactor& d);

// The same Hessian as a linear map on stacked factors.
StackedFactor hess_apply(const Problem& problem, const StackedFactor& w,
                         const StackedFactor& d);

struct MinEigenResult {
  double value;            // Rayleigh quotient at the returned direction
  StackedFactor direction; // unit Frobenius norm
  long iterations;
};

// Smallest eigenvalue of Hess g(W) by two-stage power iteration: bound the
// spectrum from above via power iteration on the Hessian itself, then power-
// iterate the shifted operator c*I - Hess. Restarts with fresh seeds guard
// against a start vector orthogonal to the extreme eigenspace. Throws
// ConvergenceError past max_iters.
MinEigenResult min_eigenvalue(const Problem& problem, const StackedFactor& w,
                              double tol = 1e-9, long max_iters = 20000,
                              std::uint64_t rng_seed = 0);

// W - W* R with R the Procrustes-optimal rotation; the negative-curvature
// candidate direction at a suspect critical point. Its norm equals
// dist(W, W*).
StackedFactor escape_direction(const StackedFactor& w,
                               const StackedFactor& w_star);

// Balanced factorization of X via its compact SVD, zero-padded to rank r:
// U* = P sqrt(Sigma) (then r - rank zero columns), V* likewise. Requires r at
// least the numerical rank of X. Satisfies phi(lift) = X,
// theta(lift) = ||X||_*, and sigma_l(W*) = sqrt(2 sigma_l(X)).
StackedFactor lift_optimal(const Matrix& x_star, Eigen::Index r);

}  // namespace nnfac
