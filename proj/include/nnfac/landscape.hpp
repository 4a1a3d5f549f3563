#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nnfac/conditioning.hpp"
#include "nnfac/convex.hpp"
#include "nnfac/factored.hpp"
#include "nnfac/problem.hpp"
#include "nnfac/solvers.hpp"

namespace nnfac {

// Certifies the landscape trichotomy on concrete instances: every candidate
// critical point of g either factors the convex optimum or carries negative
// curvature at least as strong as the rank-regime bound
//   lambda_min(Hess g(W)) <= -0.12 m min{0.5 rho(W)^2, rho(X*)}   (r >= r*)
//                            -0.099 m rho(X*)                     (r = r*)
//                            -0.12 m rho(X*)                      (W = 0).

enum class PointClass { GlobalFactorization, StrictSaddle, NotCritical, Indeterminate };
enum class BoundRegime { OverParam, ExactParam, ZeroPoint };

const char* to_string(PointClass c);
const char* to_string(BoundRegime r);

struct CriticalPointReport {
  PointClass classification = PointClass::NotCritical;
  BoundRegime regime = BoundRegime::OverParam;
  double grad_norm = 0.0;
  double balance_residual = 0.0;
  double phi_gap = 0.0;  // ||phi(W) - X*||_F
  // Filled only when the curvature branch runs (NaN otherwise).
  double lambda_min = std::numeric_limits<double>::quiet_NaN();
  double theorem_bound = std::numeric_limits<double>::quiet_NaN();
  double margin = std::numeric_limits<double>::quiet_NaN();
  // Rayleigh quotient along the normalized escape direction W - W* R.
  double escape_curvature = std::numeric_limits<double>::quiet_NaN();
  double m_used = 0.0;
};

// Classifies a candidate critical point against a certified convex solution.
// NotCritical when the gradient test fails; GlobalFactorization when phi(W)
// reproduces X*; otherwise the measured lambda_min is compared with the
// regime bound, with ties between applicable regimes broken toward the
// smaller-magnitude bound. Throws std::invalid_argument when X* itself fails
// its KKT check.
CriticalPointReport classify_critical_point(const Problem& problem,
                                            const StackedFactor& w,
                                            const Matrix& x_star, double m,
                                            double crit_tol = 1e-7,
                                            double certify_slack = 1e-6,
                                            std::uint64_t rng_seed = 0);

struct LemmaReport {
  std::string id;
  int trials = 0;
  double max_violation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  bool indeterminate = false;  // hypothesis construction failed
};

// Balance at numerical critical points (every input must satisfy
// ||grad g(W)||_F <= tol). Violations are balance residuals normalized by
// max(1, ||W||_F^2); the pass threshold is 10 * tol.
LemmaReport verify_proposition_2(const Problem& problem,
                                 const std::vector<StackedFactor>& points,
                                 double tol);

// No sampled factor beats the lifted optimum: max over random W of
// g(lift) - g(W) stays below 1e-10. The lift itself is sample zero.
LemmaReport verify_proposition_3(const Problem& problem, const Matrix& x_star,
                                 int trials, std::uint64_t rng_seed);

// Identities satisfied by balanced pairs: equality of the on/off block
// energies of D W^T, and the on-vs-off inequality for Gram differences.
std::vector<LemmaReport> verify_balance_lemmas(int trials,
                                               std::uint64_t rng_seed);

// The distance inequalities used by the curvature proof, each sampled under
// its own hypotheses; the last entry exercises the critical-point projection
// bound on a small instance solved and polished internally.
std::vector<LemmaReport> verify_distance_lemmas(int trials,
                                                std::uint64_t rng_seed);

// The critical-point projection bound
//   ||(W W^T - W* W*^T) P_range(W)||_F <= 2 (M-m)/(M+m) ||phi(W) - X*||_F
// checked at supplied numerically-critical points; per-point slack is
// 1e-6 * ||phi(W) - X*||_F.
LemmaReport verify_lemma_6(const Problem& problem, const Matrix& x_star,
                           double m, double M,
                           const std::vector<StackedFactor>& critical_points);

struct CertifyOptions {
  int lemma_trials = 1000;
  int condition_trials = 200;
  int prop3_trials = 1000;
  double crit_tol = 1e-7;
  double certify_slack = 1e-6;
  double oracle_step = 0.0;  // <= 0: 0.9 / M_hat at full rank
  double oracle_tol = 1e-9;
  long oracle_max_iters = 200000;
  double solver_grad_tol = 1e-10;
  long solver_max_iters = 100000;
  double polish_grad_tol = 1e-9;  // criticality level for the lemma-6 points
};

struct RunReport {
  int seed_index = 0;
  SolveStatus status = SolveStatus::MaxIters;
  long iterations = 0;
  int perturbations = 0;
  double grad_norm = 0.0;
  double balance_residual = 0.0;
  double phi_gap_rel = 0.0;
  CriticalPointReport classification;
};

struct CertificationBundle {
  std::uint64_t rng_seed = 0;
  int seeds = 0;
  CertifyOptions options;

  ConvexSolution oracle;
  ConditionEstimate condition;
  bool condition_pass = false;  // M_hat / m_hat <= 1.5
  bool guarantees_void = false; // conditioning gate failed

  double prop1_violation = 0.0;
  double prop1_m_used = 0.0;
  double prop1_M_used = 0.0;
  bool prop1_pass = false;

  std::vector<RunReport> runs;
  int n_global = 0, n_saddle = 0, n_not_critical = 0, n_indeterminate = 0;

  LemmaReport prop2;
  LemmaReport prop3;
  std::vector<LemmaReport> lemmas;

  bool all_pass = false;
};

// End-to-end certification: convex oracle, conditioning gate, multi-seed
// perturbed descent with per-point classification, and the full
// proposition/lemma battery. Deterministic for a given seed.
CertificationBundle certify_landscape(const Problem& problem, int seeds,
                                      std::uint64_t rng_seed,
                                      const CertifyOptions& options = {});

// Bundle rendered as a reproducible JSON document (stable field order, exact
// double round-trip). `config_echo` is embedded verbatim when nonempty.
std::string bundle_to_json(const CertificationBundle& bundle,
                           const std::string& config_echo = "");

}  // namespace nnfac
