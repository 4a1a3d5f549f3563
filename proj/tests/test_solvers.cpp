#include <doctest.h>

#include <memory>

#include "nnfac/convex.hpp"
#include "nnfac/factored.hpp"
#include "nnfac/instance_gen.hpp"
#include "nnfac/procrustes.hpp"
#include "nnfac/solvers.hpp"
#include "nnfac/spectral.hpp"
#include "oracles.hpp"

using namespace nnfac;
using oracles::TestRng;

namespace {

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

Problem diag_instance(double lambda = 1.0) {
  return Problem(std::make_shared<IdentityQuadraticLoss>(diag2(4.0, 1.0)),
                 lambda, 2);
}

}  // namespace

TEST_SUITE("gradient_descent") {
  TEST_CASE("starting at the lifted optimum is a no-op") {
    const Problem problem = diag_instance();
    const StackedFactor lift = lift_optimal(svt(diag2(4.0, 1.0), 1.0), 2);
    SolverConfig config;
    const SolveResult result = gradient_descent(problem, lift, config);
    CHECK(result.trace.status == SolveStatus::Converged);
    CHECK(result.trace.records.size() <= 3);
    CHECK((result.w.W() - lift.W()).norm() <= 1e-8);
  }

  TEST_CASE("closed-form instance lands on the soft-thresholded target") {
    // This instance is degenerate (sigma_2 of the target equals lambda),
    // so the padded factor mode decays polynomially; a modest gradient
    // tolerance is what the 1e-4 product accuracy calls for.
    const Problem problem = diag_instance();
    SolverConfig config;
    config.grad_tol = 1e-7;
    config.max_iters = 300000;
    config.rng_seed = 5;
    const StackedFactor w0 = random_init(2, 2, 2, 0.5, 42);
    const SolveResult result = gradient_descent(problem, w0, config);
    CHECK(result.trace.status == SolveStatus::Converged);
    CHECK((phi(result.w) - diag2(3.0, 0.0)).norm() <= 1e-4);
  }

  TEST_CASE("zero is a fixed point when lambda dominates") {
    TestRng rng(401);
    const Matrix b = rng.matrix(3, 3);
    const Problem problem(std::make_shared<IdentityQuadraticLoss>(b),
                          1.2 * spectral_norm(b), 2);
    REQUIRE(kkt_check(problem, Matrix::Zero(3, 3), 1e-9).pass);
    SolverConfig config;
    const SolveResult result =
        gradient_descent(problem, StackedFactor::zero(3, 3, 2), config);
    CHECK(result.trace.status == SolveStatus::Converged);
    CHECK(result.trace.records.size() == 1);
    CHECK(result.w.norm() == 0.0);
  }

  TEST_CASE("accepted objective values never increase") {
    const Problem problem = diag_instance();
    SolverConfig config;
    config.rng_seed = 7;
    const SolveResult result =
        gradient_descent(problem, random_init(2, 2, 2, 1.0, 7), config);
    const auto& records = result.trace.records;
    for (std::size_t k = 1; k < records.size(); ++k) {
      CHECK(records[k].g_value <= records[k - 1].g_value + 1e-12);
    }
  }

  TEST_CASE("max_iters surfaces as a status, not an exception") {
    const Problem problem = diag_instance();
    SolverConfig config;
    config.max_iters = 3;
    config.grad_tol = 1e-14;
    const SolveResult result =
        gradient_descent(problem, random_init(2, 2, 2, 1.0, 9), config);
    CHECK(result.trace.status == SolveStatus::MaxIters);
  }

  TEST_CASE("terminal balance residual is tiny") {
    const Problem problem = diag_instance(0.8);
    SolverConfig config;
    config.grad_tol = 1e-9;
    config.max_iters = 50000;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const SolveResult result = gradient_descent(
          problem, random_init(2, 2, 2, 0.7, 100 + seed), config);
      REQUIRE(result.trace.status == SolveStatus::Converged);
      CHECK(balance_residual(result.w) <=
            1e-6 * (1.0 + result.w.W().squaredNorm()));
    }
  }

  TEST_CASE("rotation equivariance of terminal points") {
    TestRng rng(403);
    const Problem problem = diag_instance(0.8);
    SolverConfig config;
    config.grad_tol = 1e-10;
    config.max_iters = 50000;
    const StackedFactor w0 = random_init(2, 2, 2, 0.6, 11);
    const Matrix r = rng.orthogonal(2);
    const StackedFactor w0_rot(w0.U() * r, w0.V() * r);
    const SolveResult a = gradient_descent(problem, w0, config);
    const SolveResult b = gradient_descent(problem, w0_rot, config);
    CHECK(procrustes_distance(a.w, b.w).distance <= 1e-6);
  }
}

TEST_SUITE("perturbed_gradient_descent") {
  TEST_CASE("escapes the saddle at the origin") {
    const Problem problem = diag_instance(0.8);
    SolverConfig config;
    config.rng_seed = 21;
    config.grad_tol = 1e-9;
    config.max_iters = 50000;
    const StackedFactor w0 = StackedFactor::zero(2, 2, 2);
    const double g0 = g_value(problem, w0);
    const SolveResult result = perturbed_gradient_descent(problem, w0, config);
    CHECK(result.trace.status == SolveStatus::Converged);
    CHECK(result.trace.perturbations >= 1);
    CHECK(g_value(problem, result.w) < g0 - 1e-6);
    // The only non-saddle critical point is the global factorization.
    CHECK((phi(result.w) - diag2(3.2, 0.2)).norm() <= 1e-6);
  }

  TEST_CASE("no perturbation at the lifted optimum") {
    const Problem problem = diag_instance();
    const StackedFactor lift = lift_optimal(svt(diag2(4.0, 1.0), 1.0), 2);
    SolverConfig config;
    config.rng_seed = 23;
    const SolveResult result = perturbed_gradient_descent(problem, lift, config);
    CHECK(result.trace.status == SolveStatus::Converged);
    CHECK(result.trace.perturbations == 0);
    CHECK((result.w.W() - lift.W()).norm() <= 1e-8);
  }

  TEST_CASE("random starts on a sensing instance reach the convex optimum") {
    const SensingInstance inst = generate_sensing_instance(10, 10, 2, 300, 405);
    const Problem problem(
        std::make_shared<QuadraticSensingLoss>(inst.sensing_stack,
                                               inst.observations),
        inst.lambda_suggested, 3);
    const ConvexSolution sol = solve_convex(problem, 0.0, 1e-10, 50000);
    REQUIRE(sol.kkt_pass);
    SolverConfig config;
    config.grad_tol = 1e-9;
    config.max_iters = 100000;
    const double scale = default_init_scale(problem);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      config.rng_seed = 500 + seed;
      const SolveResult result = perturbed_gradient_descent(
          problem, random_init(10, 10, 3, scale, 600 + seed), config);
      REQUIRE(result.trace.status == SolveStatus::Converged);
      CHECK((phi(result.w) - sol.x_star).norm() <=
            1e-3 * sol.x_star.norm());
    }
  }
}

TEST_SUITE("random_init") {
  TEST_CASE("nonpositive scale rejected") {
    CHECK_THROWS_AS(random_init(2, 2, 1, 0.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(random_init(2, 2, 1, -1.0, 0), std::invalid_argument);
  }

  TEST_CASE("same seed, same draw") {
    const StackedFactor a = random_init(4, 3, 2, 0.3, 99);
    const StackedFactor b = random_init(4, 3, 2, 0.3, 99);
    CHECK((a.W() - b.W()).norm() == 0.0);
    const StackedFactor c = random_init(4, 3, 2, 0.3, 100);
    CHECK((a.W() - c.W()).norm() > 0.0);
  }

  TEST_CASE("entry variance tracks the requested scale") {
    // One large draw gives 10^4 entries.
    const double scale = 0.7;
    const StackedFactor w = random_init(250, 250, 10, scale, 1234);
    const double n = static_cast<double>(w.W().size());
    const double mean = w.W().sum() / n;
    const double var =
        (w.W().array() - mean).square().sum() / n;
    CHECK(std::abs(var - scale * scale) <= 0.05 * scale * scale);
  }

  TEST_CASE("config validation") {
    SolverConfig config;
    config.backtrack_factor = 1.5;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = SolverConfig();
    config.grad_tol = 0.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = SolverConfig();
    config.armijo_constant = 0.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  }
}
