#pragma once

#include <cstdint>
#include <vector>

#include "nnfac/factored.hpp"
#include "nnfac/problem.hpp"

namespace nnfac {

enum class SolveStatus { Converged, MaxIters, Stalled };

const char* to_string(SolveStatus status);

// Per-iteration history of a factored solve. Objective values are
// nonincreasing across accepted steps; records are in iteration order.
struct SolveTrace {
  struct Record {
    long iter;
    double g_value;
    double grad_norm;
    double step_size;  // step that produced this iterate (0 at iteration 0)
    double balance_residual;
  };
  std::vector<Record> records;
  SolveStatus status = SolveStatus::MaxIters;
  int perturbations = 0;
};

struct SolverConfig {
  double init_scale = 0.0;   // <= 0: problem-scaled default (default_init_scale)
  double grad_tol = 1e-8;
  long max_iters = 20000;
  double backtrack_factor = 0.5;
  double armijo_constant = 1e-4;
  double initial_step = 0.0;  // <= 0: 1 / M_hat sampled at the factor rank
  // Saddle handling (perturbed variant only): when the gradient norm falls
  // under the trigger while the Hessian still has an eigenvalue below the
  // curvature exit level, jump by a uniform random ball perturbation.
  double perturb_trigger_tol = 1e-5;
  double perturb_radius = 0.0;  // <= 0: 10 * perturb_trigger_tol
  // Restricted lower conditioning constant; the curvature exit level is
  // 10 * grad_tol * (1 + m_hat).
  double m_hat = 1.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct SolveResult {
  StackedFactor w;
  SolveTrace trace;
};

// Armijo backtracking gradient descent on g. Converged means
// ||grad g(W)||_F <= grad_tol * (1 + |g(W)|); running out of backtracking
// rounds reports Stalled on the trace rather than throwing.
SolveResult gradient_descent(const Problem& problem, const StackedFactor& w0,
                             const SolverConfig& config);

// Gradient descent that escapes strict saddles: near critical points the
// smallest Hessian eigenvalue is measured, and a random ball perturbation is
// applied while it stays below the curvature exit level. Terminal Converged
// points therefore satisfy the gradient test and
// lambda_min >= -10 * grad_tol * (1 + m_hat).
SolveResult perturbed_gradient_descent(const Problem& problem,
                                       const StackedFactor& w0,
                                       const SolverConfig& config);

// I.i.d. Gaussian factor entries with standard deviation `scale`;
// deterministic per seed. Rejects scale <= 0.
StackedFactor random_init(Eigen::Index p, Eigen::Index q, Eigen::Index r,
                          double scale, std::uint64_t rng_seed);

// 0.1 * sqrt(||grad f(0)|| / lambda) / (p q)^{1/4}, keeping the initial
// product small against the problem scale.
double default_init_scale(const Problem& problem);

}  // namespace nnfac
