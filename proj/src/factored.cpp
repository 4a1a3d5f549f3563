#include "nnfac/factored.hpp"

#include <cmath>
#include <stdexcept>

#include "nnfac/errors.hpp"
#include "nnfac/procrustes.hpp"
#include "nnfac/rng.hpp"
#include "nnfac/spectral.hpp"

namespace nnfac {
namespace {

void require_problem_shape(const Problem& problem, const StackedFactor& w,
                           const char* what) {
  if (w.p() != problem.p() || w.q() != problem.q() ||
      w.rank() != problem.rank()) {
    throw std::invalid_argument(std::string(what) +
                                ": factor shape does not match the problem");
  }
}

}  // namespace

Matrix phi(const StackedFactor& w) { return w.U() * w.V().transpose(); }

double theta(const StackedFactor& w) { return 0.5 * w.W().squaredNorm(); }

double balance_residual(const StackedFactor& w) {
  return (w.U().transpose() * w.U() - w.V().transpose() * w.V()).norm();
}

Matrix XiMatrix::dense() const {
  const Eigen::Index p = grad_f.rows(), q = grad_f.cols();
  Matrix out = Matrix::Zero(p + q, p + q);
  out.topLeftCorner(p, p) = lambda * Matrix::Identity(p, p);
  out.bottomRightCorner(q, q) = lambda * Matrix::Identity(q, q);
  out.topRightCorner(p, q) = grad_f;
  out.bottomLeftCorner(q, p) = grad_f.transpose();
  return out;
}

Matrix XiMatrix::apply(const Matrix& m) const {
  const Eigen::Index p = grad_f.rows(), q = grad_f.cols();
  if (m.rows() != p + q) {
    throw std::invalid_argument("XiMatrix::apply: row count mismatch");
  }
  Matrix out(p + q, m.cols());
  out.topRows(p) = lambda * m.topRows(p) + grad_f * m.bottomRows(q);
  out.bottomRows(q) =
      grad_f.transpose() * m.topRows(p) + lambda * m.bottomRows(q);
  return out;
}

XiMatrix xi(const Problem& problem, const Matrix& x) {
  return {problem.lambda(), problem.loss().grad(x)};
}

double g_value(const Problem& problem, const StackedFactor& w) {
  require_problem_shape(problem, w, "g_value");
  return problem.loss().value(phi(w)) + problem.lambda() * theta(w);
}

StackedFactor g_grad(const Problem& problem, const StackedFactor& w) {
  require_problem_shape(problem, w, "g_grad");
  const Matrix grad_f = problem.loss().grad(phi(w));
  Matrix g(w.W().rows(), w.W().cols());
  g.topRows(w.p()) = grad_f * w.V() + problem.lambda() * w.U();
  g.bottomRows(w.q()) =
      grad_f.transpose() * w.U() + problem.lambda() * w.V();
  return StackedFactor::from_stacked(std::move(g), w.p());
}

double hess_quadratic_form(const Problem& problem, const StackedFactor& w,
                           const StackedFactor& d) {
  require_problem_shape(problem, w, "hess_quadratic_form");
  require_same_shape(w, d, "hess_quadratic_form");
  const Matrix x = phi(w);
  const Matrix grad_f = problem.loss().grad(x);
  // <Xi(X), D D^T> = lambda ||D||_F^2 + 2 <grad f(X), D_U D_V^T>.
  const double xi_term =
      problem.lambda() * d.W().squaredNorm() +
      2.0 * grad_f.cwiseProduct(d.U() * d.V().transpose()).sum();
  const Matrix delta = d.U() * w.V().transpose() + w.U() * d.V().transpose();
  return xi_term + problem.loss().hess_bilinear(x, delta, delta);
}

StackedFactor hess_apply(const Problem& problem, const StackedFactor& w,
                         const StackedFactor& d) {
  require_problem_shape(problem, w, "hess_apply");
  require_same_shape(w, d, "hess_apply");
  const Matrix x = phi(w);
  const XiMatrix xi_x = xi(problem, x);
  const Matrix delta = d.U() * w.V().transpose() + w.U() * d.V().transpose();
  const Matrix h_delta = problem.loss().hess_apply(x, delta);
  Matrix out = xi_x.apply(d.W());
  out.topRows(w.p()) += h_delta * w.V();
  out.bottomRows(w.q()) += h_delta.transpose() * w.U();
  return StackedFactor::from_stacked(std::move(out), w.p());
}

namespace {

struct PowerResult {
  double eigenvalue;
  Matrix vector;  // unit Frobenius norm, stacked
  double residual;
  long iterations;
};

// Power iteration for the dominant eigenvalue of op (symmetric), stopping when
// the eigen-residual ||op(v) - mu v|| falls below tol * max(1, |mu|).
template <typename Op>
PowerResult power_iterate(const Op& op, Matrix v, double tol, long max_iters) {
  double mu = 0.0, residual = std::numeric_limits<double>::infinity();
  v /= v.norm();
  long it = 0;
  for (; it < max_iters; ++it) {
    Matrix hv = op(v);
    mu = v.cwiseProduct(hv).sum();
    residual = (hv - mu * v).norm();
    if (residual <= tol * std::max(1.0, std::abs(mu))) {
      return {mu, std::move(v), residual, it};
    }
    const double norm = hv.norm();
    if (norm == 0.0) {
      // op(v) = 0: v is an exact eigenvector with eigenvalue 0.
      return {0.0, std::move(v), 0.0, it};
    }
    v = hv / norm;
  }
  return {mu, std::move(v), residual, it};
}

}  // namespace

MinEigenResult min_eigenvalue(const Problem& problem, const StackedFactor& w,
                              double tol, long max_iters,
                              std::uint64_t rng_seed) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("min_eigenvalue: tol must be positive");
  }
  require_problem_shape(problem, w, "min_eigenvalue");
  const Eigen::Index rows = w.W().rows(), cols = w.W().cols();
  const Eigen::Index p = w.p(), q = w.q();
  // The point-dependent pieces are fixed across the whole iteration; caching
  // them leaves two loss-Hessian products as the per-application cost.
  const Matrix x = phi(w);
  const Matrix grad_f = problem.loss().grad(x);
  const double lambda = problem.lambda();
  const auto hess_op = [&](const Matrix& m) {
    Matrix out(rows, cols);
    out.topRows(p) = lambda * m.topRows(p) + grad_f * m.bottomRows(q);
    out.bottomRows(q) =
        grad_f.transpose() * m.topRows(p) + lambda * m.bottomRows(q);
    const Matrix delta = m.topRows(p) * w.V().transpose() +
                         w.U() * m.bottomRows(q).transpose();
    const Matrix h_delta = problem.loss().hess_apply(x, delta);
    out.topRows(p) += h_delta * w.V();
    out.bottomRows(q) += h_delta.transpose() * w.U();
    return out;
  };

  constexpr int kRestarts = 3;
  bool have_best = false;
  MinEigenResult best{0.0, StackedFactor(), 0};
  double last_residual = std::numeric_limits<double>::infinity();
  double last_rayleigh = 0.0;
  for (int restart = 0; restart < kRestarts; ++restart) {
    Rng rng = Rng::substream(rng_seed, static_cast<std::uint64_t>(restart));

    // Stage 1: spectral-radius estimate; a loose tolerance is enough because
    // the shift only needs to dominate lambda_max.
    const PowerResult radius = power_iterate(
        hess_op, rng.gaussian_matrix(rows, cols), 1e-3, max_iters / 4);
    const double shift = 1.1 * std::abs(radius.eigenvalue) + 1.0;

    // Stage 2: dominant eigenpair of shift*I - Hess is (shift - lambda_min).
    const auto shifted_op = [&](const Matrix& m) {
      return (shift * m - hess_op(m)).eval();
    };
    const PowerResult bottom =
        power_iterate(shifted_op, rng.gaussian_matrix(rows, cols), tol,
                      max_iters - radius.iterations);
    last_residual = bottom.residual;
    last_rayleigh = shift - bottom.eigenvalue;
    if (bottom.residual > tol * std::max(1.0, std::abs(bottom.eigenvalue))) {
      continue;  // unlucky start; try a fresh seed
    }
    StackedFactor direction = StackedFactor::from_stacked(bottom.vector, w.p());
    const double rayleigh = hess_quadratic_form(problem, w, direction);
    if (!have_best || rayleigh < best.value) {
      best = {rayleigh, std::move(direction),
              radius.iterations + bottom.iterations};
      have_best = true;
    }
  }
  if (!have_best) {
    throw ConvergenceError(
        "min_eigenvalue: power iteration did not reach tolerance; last "
        "Rayleigh quotient " + std::to_string(last_rayleigh),
        last_residual, max_iters);
  }
  return best;
}

StackedFactor escape_direction(const StackedFactor& w,
                               const StackedFactor& w_star) {
  require_same_shape(w, w_star, "escape_direction");
  const ProcrustesResult aligned = procrustes_distance(w, w_star);
  return StackedFactor::from_stacked(
      w.W() - w_star.W() * aligned.rotation, w.p());
}

StackedFactor lift_optimal(const Matrix& x_star, Eigen::Index r) {
  require_finite(x_star, "lift_optimal");
  const Eigen::Index p = x_star.rows(), q = x_star.cols();
  Eigen::Index rank_star = 0;
  Matrix u = Matrix::Zero(p, r), v = Matrix::Zero(q, r);
  if (x_star.norm() > 0.0) {
    const Svd decomposition = svd(x_star);
    rank_star = numerical_rank(decomposition.singulars);
    if (r < rank_star) {
      throw std::invalid_argument("factor rank below solution rank");
    }
    const Vector roots =
        decomposition.singulars.head(rank_star).cwiseSqrt();
    u.leftCols(rank_star) =
        decomposition.left.leftCols(rank_star) * roots.asDiagonal();
    v.leftCols(rank_star) =
        decomposition.right.leftCols(rank_star) * roots.asDiagonal();
  }
  return StackedFactor(u, v);
}

}  // namespace nnfac
