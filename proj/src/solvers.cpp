#include "nnfac/solvers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "nnfac/conditioning.hpp"
#include "nnfac/rng.hpp"
#include "nnfac/spectral.hpp"

namespace nnfac {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIters: return "MaxIters";
    case SolveStatus::Stalled: return "Stalled";
  }
  return "Unknown";
}

void SolverConfig::validate() const {
  if (!(grad_tol > 0.0) || !(perturb_trigger_tol > 0.0)) {
    throw std::invalid_argument("SolverConfig: tolerances must be positive");
  }
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw std::invalid_argument("SolverConfig: backtrack_factor must be in (0,1)");
  }
  if (!(armijo_constant > 0.0 && armijo_constant < 1.0)) {
    throw std::invalid_argument("SolverConfig: armijo_constant must be in (0,1)");
  }
  if (max_iters < 1) {
    throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
  }
  if (!(m_hat > 0.0)) {
    throw std::invalid_argument("SolverConfig: m_hat must be positive");
  }
}

namespace {

constexpr int kMaxBacktracks = 50;
constexpr double kEps = std::numeric_limits<double>::epsilon();

double resolve_initial_step(const Problem& problem, const SolverConfig& config) {
  if (config.initial_step > 0.0) return config.initial_step;
  const ConditionEstimate cond = estimate_restricted_condition(
      problem.loss(), problem.rank(), 50, config.rng_seed ^ 0x57e9u);
  return 1.0 / cond.M_hat;
}

// Uniform draw from the Frobenius ball of the given radius.
Matrix ball_perturbation(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                         double radius) {
  Matrix direction = rng.gaussian_matrix(rows, cols);
  const double norm = direction.norm();
  if (norm == 0.0) return Matrix::Zero(rows, cols);
  const double dim = static_cast<double>(rows * cols);
  const double magnitude = radius * std::pow(rng.uniform(), 1.0 / dim);
  return direction * (magnitude / norm);
}

struct LineSearchOutcome {
  bool accepted = false;
  Matrix w_next;
  double g_next = 0.0;
  double step = 0.0;
};

LineSearchOutcome armijo_search(const Problem& problem, const StackedFactor& w,
                                double g_now, const Matrix& grad,
                                double grad_sq, double step0,
                                const SolverConfig& config) {
  LineSearchOutcome out;
  double step = step0;
  for (int k = 0; k < kMaxBacktracks; ++k) {
    Matrix candidate = w.W() - step * grad;
    if (candidate.allFinite()) {
      const double g_candidate = g_value(
          problem, StackedFactor::from_stacked(candidate, w.p()));
      if (g_candidate <= g_now - config.armijo_constant * step * grad_sq) {
        out.accepted = true;
        out.w_next = std::move(candidate);
        out.g_next = g_candidate;
        out.step = step;
        return out;
      }
    }
    step *= config.backtrack_factor;
  }
  return out;
}

// Once objective decreases stop resolving in double precision, steps are
// accepted on strict gradient-norm decrease instead, holding the objective to
// rounding noise; the Armijo condition holds there to machine precision while
// the gradient can still shrink by several more orders.
LineSearchOutcome polish_search(const Problem& problem, const StackedFactor& w,
                                double g_now, const Matrix& grad,
                                double grad_norm, double step0,
                                const SolverConfig& config) {
  LineSearchOutcome out;
  double step = step0;
  for (int k = 0; k < kMaxBacktracks; ++k) {
    Matrix candidate = w.W() - step * grad;
    if (candidate.allFinite()) {
      const StackedFactor next = StackedFactor::from_stacked(candidate, w.p());
      const double g_candidate = g_value(problem, next);
      if (std::isfinite(g_candidate) &&
          g_candidate <= g_now + 8.0 * kEps * (1.0 + std::abs(g_now)) &&
          g_grad(problem, next).norm() < grad_norm) {
        out.accepted = true;
        out.w_next = next.W();
        out.g_next = g_candidate;
        out.step = step;
        return out;
      }
    }
    step *= config.backtrack_factor;
  }
  return out;
}

SolveResult descend(const Problem& problem, const StackedFactor& w0,
                    const SolverConfig& config, bool escape_saddles) {
  config.validate();
  if (w0.p() != problem.p() || w0.q() != problem.q() ||
      w0.rank() != problem.rank()) {
    throw std::invalid_argument("solver: initial point shape mismatch");
  }

  const double step0 = resolve_initial_step(problem, config);
  const double curvature_exit = 10.0 * config.grad_tol * (1.0 + config.m_hat);
  const double min_eig_tol = std::min(1e-9, 0.2 * curvature_exit);
  const double perturb_radius = config.perturb_radius > 0.0
                                    ? config.perturb_radius
                                    : 10.0 * config.perturb_trigger_tol;
  Rng perturb_rng = Rng::substream(config.rng_seed, 0x6a11u);

  StackedFactor w = w0;
  double g_now = g_value(problem, w);
  double last_step = 0.0;
  double warm_step = step0;
  double last_checked_grad = std::numeric_limits<double>::infinity();
  bool polishing = false;
  int floor_steps = 0;

  SolveTrace trace;
  trace.status = SolveStatus::MaxIters;
  for (long iter = 0; iter < config.max_iters; ++iter) {
    const StackedFactor grad = g_grad(problem, w);
    const double grad_norm = grad.norm();
    trace.records.push_back(
        {iter, g_now, grad_norm, last_step, balance_residual(w)});

    const bool grad_small =
        grad_norm <= config.grad_tol * (1.0 + std::abs(g_now));
    if (escape_saddles) {
      // Check curvature once the gradient is small, re-checking only after
      // meaningful further progress so the eigenvalue solve stays occasional.
      const bool near_critical =
          grad_small || (grad_norm <= config.perturb_trigger_tol &&
                         grad_norm <= 0.01 * last_checked_grad);
      if (near_critical) {
        last_checked_grad = grad_norm;
        // At a point with gradient norm delta, the Hessian spectrum carries a
        // cluster of rotation artifacts of width ~ delta * ||W||; both the
        // eigensolver tolerance and the saddle test must sit above it.
        const double tol_eig = std::max(min_eig_tol, grad_norm);
        const double artifact_floor =
            10.0 * grad_norm * (1.0 + w.norm());
        const MinEigenResult bottom = min_eigenvalue(
            problem, w, tol_eig, 40000,
            config.rng_seed ^ static_cast<std::uint64_t>(iter + 1));
        if (bottom.value < -std::max(curvature_exit, artifact_floor)) {
          const Matrix jump = ball_perturbation(
              perturb_rng, w.W().rows(), w.W().cols(), perturb_radius);
          w = StackedFactor::from_stacked(w.W() + jump, w.p());
          g_now = g_value(problem, w);
          last_step = 0.0;
          last_checked_grad = std::numeric_limits<double>::infinity();
          polishing = false;
          floor_steps = 0;
          ++trace.perturbations;
          continue;
        }
        if (grad_small && bottom.value >= -curvature_exit) {
          trace.status = SolveStatus::Converged;
          break;
        }
        // Otherwise the estimate is still inside the artifact band; further
        // descent shrinks the band until the test resolves one way or the
        // other.
      }
    } else if (grad_small) {
      trace.status = SolveStatus::Converged;
      break;
    }

    const double step_try = std::min(step0, 2.0 * warm_step);
    LineSearchOutcome ls;
    if (!polishing) {
      ls = armijo_search(problem, w, g_now, grad.W(), grad_norm * grad_norm,
                         step_try, config);
      if (ls.accepted &&
          g_now - ls.g_next <= 8.0 * kEps * (1.0 + std::abs(g_now))) {
        ++floor_steps;
      } else {
        floor_steps = 0;
      }
      if (!ls.accepted || floor_steps >= 3) polishing = true;
    }
    if (polishing && !ls.accepted) {
      ls = polish_search(problem, w, g_now, grad.W(), grad_norm, step_try,
                         config);
    }
    if (!ls.accepted) {
      trace.status = SolveStatus::Stalled;
      break;
    }
    w = StackedFactor::from_stacked(ls.w_next, w.p());
    g_now = ls.g_next;
    last_step = warm_step = ls.step;
  }
  return {std::move(w), std::move(trace)};
}

}  // namespace

SolveResult gradient_descent(const Problem& problem, const StackedFactor& w0,
                             const SolverConfig& config) {
  return descend(problem, w0, config, /*escape_saddles=*/false);
}

SolveResult perturbed_gradient_descent(const Problem& problem,
                                       const StackedFactor& w0,
                                       const SolverConfig& config) {
  return descend(problem, w0, config, /*escape_saddles=*/true);
}

StackedFactor random_init(Eigen::Index p, Eigen::Index q, Eigen::Index r,
                          double scale, std::uint64_t rng_seed) {
  if (!(scale > 0.0)) {
    throw std::invalid_argument("random_init: scale must be positive");
  }
  Rng rng(rng_seed);
  return StackedFactor(rng.gaussian_matrix(p, r, scale),
                       rng.gaussian_matrix(q, r, scale));
}

double default_init_scale(const Problem& problem) {
  const Matrix grad0 =
      problem.loss().grad(Matrix::Zero(problem.p(), problem.q()));
  const double top = std::max(spectral_norm(grad0), problem.lambda());
  const double size = static_cast<double>(problem.p() * problem.q());
  return 0.1 * std::sqrt(top / problem.lambda()) / std::pow(size, 0.25);
}

}  // namespace nnfac
