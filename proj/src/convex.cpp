#include "nnfac/convex.hpp"

#include <cmath>
#include <stdexcept>

#include "nnfac/conditioning.hpp"
#include "nnfac/errors.hpp"
#include "nnfac/spectral.hpp"

namespace nnfac {

Matrix svt(const Matrix& x, double tau) {
  if (tau < 0.0) {
    throw std::invalid_argument("svt: threshold must be nonnegative");
  }
  if (tau == 0.0) return x;
  const Svd decomposition = svd(x);
  const Vector thresholded =
      (decomposition.singulars.array() - tau).max(0.0).matrix();
  return decomposition.left * thresholded.asDiagonal() *
         decomposition.right.transpose();
}

KktReport kkt_check(const Problem& problem, const Matrix& x, double tol) {
  const Matrix grad_f = problem.loss().grad(x);
  const double lambda = problem.lambda();
  const double slack = lambda - spectral_norm(grad_f);

  double residual = 0.0;
  if (x.norm() > 0.0) {
    const Svd decomposition = svd(x);
    const Eigen::Index rank = numerical_rank(decomposition.singulars);
    if (rank > 0) {
      const Matrix p_star = decomposition.left.leftCols(rank);
      const Matrix q_star = decomposition.right.leftCols(rank);
      const double left = (grad_f * q_star + lambda * p_star).norm();
      const double right =
          (grad_f.transpose() * p_star + lambda * q_star).norm();
      residual = std::max(left, right) / (1.0 + x.norm());
    }
  }
  const bool pass = slack >= -tol && residual <= tol;
  return {slack, residual, pass};
}

namespace {

// Spectral norm of the loss Hessian (at zero; exact for the quadratic family)
// by power iteration. Sampled Rayleigh quotients underestimate the smoothness
// constant badly when measurements are scarce, so the step rule uses this
// bound instead.
double hessian_spectral_bound(const LossModel& loss) {
  const Eigen::Index p = loss.rows(), q = loss.cols();
  const Matrix x0 = Matrix::Zero(p, q);
  Matrix v = Matrix::Ones(p, q) + Matrix::Identity(p, q);
  v /= v.norm();
  double mu = 1.0;
  for (int it = 0; it < 200; ++it) {
    const Matrix hv = loss.hess_apply(x0, v);
    const double next = v.cwiseProduct(hv).sum();
    const double norm = hv.norm();
    if (norm == 0.0) return 1.0;
    v = hv / norm;
    if (std::abs(next - mu) <= 1e-3 * std::abs(next)) {
      mu = next;
      break;
    }
    mu = next;
  }
  return std::abs(mu);
}

}  // namespace

ConvexSolution solve_convex(const Problem& problem, double step, double tol,
                            long max_iters, double kkt_tol) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("solve_convex: tol must be positive");
  }
  if (step <= 0.0) {
    step = 0.9 / (1.05 * hessian_spectral_bound(problem.loss()));
  }

  const double lambda = problem.lambda();
  const auto objective = [&](const Matrix& x) {
    return problem.loss().value(x) + lambda * nuclear_norm(x);
  };

  Matrix x = Matrix::Zero(problem.p(), problem.q());
  std::vector<double> trace;
  trace.push_back(objective(x));
  long it = 0;
  double residual = std::numeric_limits<double>::infinity();
  for (; it < max_iters; ++it) {
    const Matrix next = svt(x - step * problem.loss().grad(x), step * lambda);
    residual = (next - x).norm();
    x = next;
    trace.push_back(objective(x));
    if (residual <= tol * step) break;
  }
  if (residual > tol * step) {
    throw ConvergenceError("solve_convex: proximal gradient did not converge",
                           residual, it, x);
  }

  ConvexSolution out;
  out.x_star = x;
  out.rank_star =
      x.norm() > 0.0 ? numerical_rank(svd(x).singulars) : 0;
  const KktReport kkt = kkt_check(problem, x, kkt_tol);
  out.kkt_spectral_slack = kkt.spectral_slack;
  out.subgradient_residual = kkt.subgradient_residual;
  out.kkt_pass = kkt.pass;
  out.iterations = it + 1;
  out.objective = trace.back();
  out.objective_trace = std::move(trace);
  return out;
}

}  // namespace nnfac
