#include "nnfac/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include <json.hpp>

#include "nnfac/procrustes.hpp"
#include "nnfac/rng.hpp"
#include "nnfac/spectral.hpp"

namespace nnfac {

const char* to_string(PointClass c) {
  switch (c) {
    case PointClass::GlobalFactorization: return "GlobalFactorization";
    case PointClass::StrictSaddle: return "StrictSaddle";
    case PointClass::NotCritical: return "NotCritical";
    case PointClass::Indeterminate: return "Indeterminate";
  }
  return "Unknown";
}

const char* to_string(BoundRegime r) {
  switch (r) {
    case BoundRegime::OverParam: return "OverParam";
    case BoundRegime::ExactParam: return "ExactParam";
    case BoundRegime::ZeroPoint: return "ZeroPoint";
  }
  return "Unknown";
}

namespace {

constexpr double kZeroPointTol = 1e-10;

double rho_or_zero(const Matrix& m) {
  if (m.norm() == 0.0) return 0.0;
  const Vector s = svd(m).singulars;
  const Eigen::Index rank = numerical_rank(s);
  return rank > 0 ? s(rank - 1) : 0.0;
}

// The regime bound of the main curvature theorem, taking the least demanding
// (smallest magnitude) value when several regimes apply to the same point.
std::pair<double, BoundRegime> theorem_bound_for(const StackedFactor& w,
                                                 const Matrix& x_star,
                                                 Eigen::Index rank_star,
                                                 double m) {
  const double rho_star = rho_or_zero(x_star);
  const bool zero_point = w.norm() <= kZeroPointTol;
  const bool exact_param = w.rank() == rank_star;

  double bound = -std::numeric_limits<double>::infinity();
  BoundRegime regime = BoundRegime::OverParam;
  if (zero_point) {
    bound = -0.12 * m * rho_star;
    regime = BoundRegime::ZeroPoint;
  } else {
    const double rho_w = rho_or_zero(w.W());
    bound = -0.12 * m * std::min(0.5 * rho_w * rho_w, rho_star);
    regime = BoundRegime::OverParam;
  }
  if (exact_param) {
    const double exact_bound = -0.099 * m * rho_star;
    if (exact_bound > bound) {
      bound = exact_bound;
      if (!zero_point) regime = BoundRegime::ExactParam;
    }
  }
  return {bound, regime};
}

}  // namespace

CriticalPointReport classify_critical_point(const Problem& problem,
                                            const StackedFactor& w,
                                            const Matrix& x_star, double m,
                                            double crit_tol,
                                            double certify_slack,
                                            std::uint64_t rng_seed) {
  if (!(m > 0.0)) {
    throw std::invalid_argument("classify_critical_point: m must be positive");
  }
  if (!kkt_check(problem, x_star, 1e-6).pass) {
    throw std::invalid_argument("oracle solution not certified");
  }

  CriticalPointReport report;
  report.m_used = m;
  report.grad_norm = g_grad(problem, w).norm();
  report.balance_residual = balance_residual(w);
  report.phi_gap = (phi(w) - x_star).norm();

  const Eigen::Index rank_star =
      x_star.norm() > 0.0 ? numerical_rank(svd(x_star).singulars) : 0;
  const auto [bound, regime] = theorem_bound_for(w, x_star, rank_star, m);
  report.regime = regime;

  if (report.grad_norm > crit_tol * (1.0 + w.norm())) {
    report.classification = PointClass::NotCritical;
    return report;
  }
  if (report.phi_gap <= crit_tol * (1.0 + x_star.norm())) {
    report.classification = PointClass::GlobalFactorization;
    return report;
  }

  report.theorem_bound = bound;
  // Tolerance no finer than the rotation-artifact band at this gradient norm,
  // or the residual stop could chase an unreachable floor.
  const MinEigenResult bottom = min_eigenvalue(
      problem, w, std::max(1e-9, report.grad_norm), 40000, rng_seed);
  report.lambda_min = bottom.value;
  report.margin = bound - bottom.value;

  const StackedFactor w_star = lift_optimal(x_star, problem.rank());
  const StackedFactor escape = escape_direction(w, w_star);
  if (escape.norm() > 0.0) {
    report.escape_curvature =
        hess_quadratic_form(problem, w, escape) / escape.W().squaredNorm();
  }

  report.classification = bottom.value <= bound + certify_slack
                              ? PointClass::StrictSaddle
                              : PointClass::Indeterminate;
  return report;
}

LemmaReport verify_proposition_2(const Problem& problem,
                                 const std::vector<StackedFactor>& points,
                                 double tol) {
  LemmaReport report;
  report.id = "proposition2";
  report.trials = static_cast<int>(points.size());
  report.tolerance = 10.0 * tol;
  double worst = 0.0;
  for (const auto& w : points) {
    const double grad_norm = g_grad(problem, w).norm();
    if (grad_norm > tol) {
      throw std::invalid_argument(
          "verify_proposition_2: input point is not critical at the stated "
          "tolerance");
    }
    const double scale = std::max(1.0, w.W().squaredNorm());
    worst = std::max(worst, balance_residual(w) / scale);
  }
  report.max_violation = worst;
  report.pass = worst <= report.tolerance;
  return report;
}

LemmaReport verify_proposition_3(const Problem& problem, const Matrix& x_star,
                                 int trials, std::uint64_t rng_seed) {
  LemmaReport report;
  report.id = "proposition3";
  report.trials = trials;
  report.tolerance = 1e-10;
  const StackedFactor lift = lift_optimal(x_star, problem.rank());
  const double g_lift = g_value(problem, lift);

  double worst = -std::numeric_limits<double>::infinity();
  if (trials > 0) {
    // Sample zero is the lift itself; the rest sweep scales around it.
    worst = 0.0;
    const double dim = static_cast<double>((problem.p() + problem.q()) *
                                           problem.rank());
    const double ref =
        std::max(lift.norm() / std::sqrt(dim), 0.1);
    for (int t = 1; t < trials; ++t) {
      Rng rng = Rng::substream(rng_seed, static_cast<std::uint64_t>(t));
      const double scale = ref * std::pow(10.0, 2.0 * rng.uniform() - 1.0);
      const StackedFactor w(
          rng.gaussian_matrix(problem.p(), problem.rank(), scale),
          rng.gaussian_matrix(problem.q(), problem.rank(), scale));
      worst = std::max(worst, g_lift - g_value(problem, w));
    }
  }
  report.max_violation = worst;
  report.pass = worst <= report.tolerance;
  return report;
}

namespace {

struct ShapeSampler {
  Eigen::Index p, q, r;
};

ShapeSampler random_shape(Rng& rng, Eigen::Index max_side = 6) {
  const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng.uniform() * max_side);
  const Eigen::Index q = 1 + static_cast<Eigen::Index>(rng.uniform() * max_side);
  const Eigen::Index r =
      1 + static_cast<Eigen::Index>(rng.uniform() * std::min(p, q));
  return {p, q, std::min({p, q, r})};
}

// Balanced factor with the same product as a random draw (lifting the product
// rebalances the Gram matrices exactly).
StackedFactor random_balanced(Rng& rng, Eigen::Index p, Eigen::Index q,
                              Eigen::Index r) {
  const StackedFactor raw(rng.gaussian_matrix(p, r), rng.gaussian_matrix(q, r));
  return lift_optimal(phi(raw), r);
}

LemmaReport check_lemma_1(int trials, std::uint64_t rng_seed) {
  LemmaReport report;
  report.id = "lemma1";
  report.trials = trials;
  report.tolerance = 1e-10;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng = Rng::substream(rng_seed ^ 0x11u, static_cast<std::uint64_t>(t));
    const auto [p, q, r] = random_shape(rng);
    const StackedFactor w = random_balanced(rng, p, q, r);
    const StackedFactor d(rng.gaussian_matrix(p, r), rng.gaussian_matrix(q, r));
    const double on = p_on(d, w).squaredNorm();
    const double off = p_off(d, w).squaredNorm();
    worst = std::max(worst, std::abs(on - off) / std::max(1.0, on + off));
  }
  report.max_violation = worst;
  report.pass = worst <= report.tolerance;
  return report;
}

LemmaReport check_lemma_2(int trials, std::uint64_t rng_seed) {
  LemmaReport report;
  report.id = "lemma2";
  report.trials = trials;
  report.tolerance = 1e-10;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng = Rng::substream(rng_seed ^ 0x22u, static_cast<std::uint64_t>(t));
    const auto [p, q, r] = random_shape(rng);
    StackedFactor w1 = random_balanced(rng, p, q, r);
    StackedFactor w2 = random_balanced(rng, p, q, r);
    // Scale-invariant inequality; normalize so violations are comparable.
    if (w1.norm() > 0.0) {
      w1 = StackedFactor::from_stacked(w1.W() / w1.norm(), p);
    }
    if (w2.norm() > 0.0) {
      w2 = StackedFactor::from_stacked(w2.W() / w2.norm(), p);
    }
    const Matrix gram_diff =
        w1.W() * w1.W().transpose() - w2.W() * w2.W().transpose();
    const Eigen::Index pp = p;
    const double on = (gram_diff.topLeftCorner(pp, pp).squaredNorm() +
                       gram_diff.bottomRightCorner(q, q).squaredNorm());
    const double off = gram_diff.squaredNorm() - on;
    worst = std::max(worst, on - off);
  }
  report.max_violation = worst;
  report.pass = worst <= report.tolerance;
  return report;
}

double rho_of(const StackedFactor& w) { return rho_or_zero(w.W()); }

LemmaReport check_lemma_3(int trials, std::uint64_t rng_seed) {
  LemmaReport report;
  report.id = "lemma3";
  report.trials = trials;
  report.tolerance = 1e-9;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng = Rng::substream(rng_seed ^ 0x33u, static_cast<std::uint64_t>(t));
    const auto [p, q, r] = random_shape(rng);
    StackedFactor w1(rng.gaussian_matrix(p, r), rng.gaussian_matrix(q, r));
    StackedFactor w2(rng.gaussian_matrix(p, r), rng.gaussian_matrix(q, r));
    if (t % 10 == 3) w2 = StackedFactor::zero(p, q, r);  // degenerate pair
    if (w1.norm() > 0.0) {
      w1 = StackedFactor::from_stacked(w1.W() / w1.norm(), p);
    }
    const double rho1 = rho_of(w1), rho2 = rho_of(w2);
    double min_rho;
    if (w1.norm() == 0.0 && w2.norm() == 0.0) continue;
    if (w1.norm() == 0.0) {
      min_rho = rho2;
    } else if (w2.norm() == 0.0) {
      min_rho = rho1;
    } else {
      min_rho = std::min(rho1, rho2);
    }
    const double lhs =
        (w1.W() * w1.W().transpose() - w2.W() * w2.W().transpose()).norm();
    const double dist = procrustes_distance(w1, w2).distance;
    worst = std::max(worst, min_rho * dist - lhs);
  }
  report.max_violation = worst;
  report.pass = worst <= report.tolerance;
  return report;
}

LemmaReport check_lemma_4(int trials, std::uint64_t rng_seed) {
  LemmaReport report;
  report.id = "lemma4";
  report.trials = trials;
  report.tolerance = 1e-9;
  const double factor = 2.0 * (std::sqrt(2.0) - 1.0);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng = Rng::substream(rng_seed ^ 0x44u, static_cast<std::uint64_t>(t));
    const auto [p, q, r] = random_shape(rng);
    StackedFactor w1(rng.gaussian_matrix(p, r), rng.gaussian_matrix(q, r));
    const StackedFactor w2(rng.gaussian_matrix(p, r),
                           rng.gaussian_matrix(q, r));
    if (w1.norm() == 0.0) continue;
    w1 = StackedFactor::from_stacked(w1.W() / w1.norm(), p);
    // Hypothesis: W1 has full column rank (Gaussian draws have it a.s.).
    const Vector s1 = svd(w1.W()).singulars;
    if (numerical_rank(s1) < r) continue;
    const double lhs =
        (w1.W() * w1.W().transpose() - w2.W() * w2.W().transpose()).norm();
    const double dist = procrustes_distance(w1, w2).distance;
    worst = std::max(worst, factor * s1(r - 1) * dist - lhs);
  }
  report.max_violation = worst;
  report.pass = worst <= report.tolerance;
  return report;
}

Matrix range_projector(const StackedFactor& w) {
  const Eigen::Index n = w.W().rows();
  if (w.norm() == 0.0) return Matrix::Zero(n, n);
  const Svd dec = svd(w.W());
  const Eigen::Index rank = numerical_rank(dec.singulars);
  if (rank == 0) return Matrix::Zero(n, n);
  const Matrix basis = dec.left.leftCols(rank);
  return basis * basis.transpose();
}

LemmaReport check_lemma_5(int trials, std::uint64_t rng_seed) {
  LemmaReport report;
  report.id = "lemma5";
  report.trials = trials;
  report.tolerance = 1e-9;
  const double tail = 3.0 + 1.0 / (2.0 * (std::sqrt(2.0) - 1.0));
  double worst = 0.0;
  bool construction_ok = true;
  for (int t = 0; t < trials; ++t) {
    Rng rng = Rng::substream(rng_seed ^ 0x55u, static_cast<std::uint64_t>(t));
    const auto [p, q, r] = random_shape(rng);
    StackedFactor w1(rng.gaussian_matrix(p, r), rng.gaussian_matrix(q, r));
    StackedFactor w2(rng.gaussian_matrix(p, r), rng.gaussian_matrix(q, r));
    if (w1.norm() > 0.0) {
      w1 = StackedFactor::from_stacked(w1.W() / w1.norm(), p);
    }
    if (w2.norm() > 0.0) {
      w2 = StackedFactor::from_stacked(w2.W() / w2.norm(), p);
    }
    // Procrustes alignment makes W1^T W2 = B S B^T, symmetric PSD.
    const ProcrustesResult aligned = procrustes_distance(w1, w2);
    w2 = StackedFactor::from_stacked(w2.W() * aligned.rotation, p);
    const Matrix cross = w1.W().transpose() * w2.W();
    const double sym_residual = (cross - cross.transpose()).norm();
    const double min_eig =
        Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (cross + cross.transpose()))
            .eigenvalues()
            .minCoeff();
    if (sym_residual > 1e-8 || min_eig < -1e-10) {
      construction_ok = false;
      continue;
    }
    const Matrix gram_diff =
        w1.W() * w1.W().transpose() - w2.W() * w2.W().transpose();
    const double lhs = ((w1.W() - w2.W()) * w1.W().transpose()).squaredNorm();
    const double rhs = gram_diff.squaredNorm() / 8.0 +
                       tail * (gram_diff * range_projector(w1)).squaredNorm();
    worst = std::max(worst, lhs - rhs);
  }
  report.max_violation = worst;
  report.pass = worst <= report.tolerance && construction_ok;
  report.indeterminate = !construction_ok;
  return report;
}

}  // namespace

LemmaReport verify_lemma_6(const Problem& problem, const Matrix& x_star,
                           double m, double M,
                           const std::vector<StackedFactor>& critical_points) {
  LemmaReport report;
  report.id = "lemma6";
  report.trials = static_cast<int>(critical_points.size());
  report.tolerance = 0.0;  // per-point slack already subtracted
  const StackedFactor w_star = lift_optimal(x_star, problem.rank());
  const Matrix star_gram = w_star.W() * w_star.W().transpose();
  const double ratio = (M - m) / (M + m);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& w : critical_points) {
    const double phi_gap = (phi(w) - x_star).norm();
    const double lhs =
        ((w.W() * w.W().transpose() - star_gram) * range_projector(w)).norm();
    const double rhs = 2.0 * ratio * phi_gap;
    // The bound is stated for exact critical points; at a point with gradient
    // residual delta both sides inherit an O(delta) error, so the check
    // carries that term alongside the relative slack. It vanishes at exact
    // critical points and is negligible wherever the bound has content.
    const double hypothesis_error =
        100.0 * g_grad(problem, w).norm() * (1.0 + w.W().squaredNorm());
    const double slack = 1e-6 * phi_gap + hypothesis_error;
    worst = std::max(worst, lhs - rhs - slack);
  }
  report.max_violation = worst;
  report.pass = worst <= report.tolerance;
  return report;
}

std::vector<LemmaReport> verify_balance_lemmas(int trials,
                                               std::uint64_t rng_seed) {
  return {check_lemma_1(trials, rng_seed), check_lemma_2(trials, rng_seed)};
}

namespace {

// Small closed-form instance for the standalone lemma-6 check: an identity
// quadratic loss whose critical points (full and partial lifts of the
// soft-thresholded target, plus zero) are constructible exactly.
std::vector<LemmaReport> distance_lemma_suite(int trials,
                                              std::uint64_t rng_seed,
                                              bool include_lemma6) {
  std::vector<LemmaReport> reports{check_lemma_3(trials, rng_seed),
                                   check_lemma_4(trials, rng_seed),
                                   check_lemma_5(trials, rng_seed)};
  if (!include_lemma6) return reports;

  Rng rng(rng_seed ^ 0x66u);
  const Eigen::Index p = 6, q = 5;
  Vector spectrum(5);
  spectrum << 5.0, 3.0, 1.8, 0.4, 0.2;
  const Matrix b = rng.orthogonal(p).leftCols(5) * spectrum.asDiagonal() *
                   rng.orthogonal(q).transpose();
  const double lambda = 1.0;
  const Problem problem(std::make_shared<IdentityQuadraticLoss>(b), lambda, 3);
  const Matrix x_star = svt(b, lambda);

  std::vector<StackedFactor> points;
  points.push_back(StackedFactor::zero(p, q, 3));
  points.push_back(lift_optimal(x_star, 3));
  // Partial lifts: critical points built from subsets of the target's
  // above-threshold singular directions.
  const Svd dec = svd(b);
  for (const std::vector<int>& subset :
       {std::vector<int>{0}, std::vector<int>{1}, std::vector<int>{0, 1}}) {
    Matrix u = Matrix::Zero(p, 3), v = Matrix::Zero(q, 3);
    for (std::size_t k = 0; k < subset.size(); ++k) {
      const int i = subset[k];
      const double root = std::sqrt(dec.singulars(i) - lambda);
      u.col(static_cast<Eigen::Index>(k)) = root * dec.left.col(i);
      v.col(static_cast<Eigen::Index>(k)) = root * dec.right.col(i);
    }
    points.push_back(StackedFactor(u, v));
  }
  // A polished solver terminal.
  SolverConfig config;
  config.grad_tol = 1e-12;
  config.max_iters = 50000;
  config.rng_seed = rng_seed ^ 0x77u;
  const StackedFactor w0 = random_init(p, q, 3, 0.3, rng_seed ^ 0x88u);
  points.push_back(gradient_descent(problem, w0, config).w);

  reports.push_back(verify_lemma_6(problem, x_star, 1.0, 1.0, points));
  return reports;
}

}  // namespace

std::vector<LemmaReport> verify_distance_lemmas(int trials,
                                                std::uint64_t rng_seed) {
  return distance_lemma_suite(trials, rng_seed, /*include_lemma6=*/true);
}

namespace {

// Failures inside the pipeline surface with the stage that produced them.
template <typename Fn>
auto certify_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("certify[") + stage + "]: " +
                             e.what());
  }
}

}  // namespace

CertificationBundle certify_landscape(const Problem& problem, int seeds,
                                      std::uint64_t rng_seed,
                                      const CertifyOptions& options) {
  if (seeds < 1) {
    throw std::invalid_argument("certify_landscape: seeds must be >= 1");
  }
  CertificationBundle bundle;
  bundle.rng_seed = rng_seed;
  bundle.seeds = seeds;
  bundle.options = options;

  bundle.oracle = certify_stage("oracle", [&] {
    return solve_convex(problem, options.oracle_step, options.oracle_tol,
                        options.oracle_max_iters);
  });

  bundle.condition = certify_stage("conditioning", [&] {
    return estimate_restricted_condition(problem.loss(), problem.rank(),
                                         options.condition_trials,
                                         rng_seed ^ 0xc0u);
  });
  bundle.condition_pass = bundle.condition.ratio() <= 1.5;
  bundle.guarantees_void = !bundle.condition_pass;

  // Restricted orthogonality, with the sampled sandwich widened a little so
  // the check is not defeated by fresh samples landing outside the sampled
  // extremes.
  bundle.prop1_m_used = bundle.condition.m_hat / 1.05;
  bundle.prop1_M_used = bundle.condition.M_hat * 1.05;
  bundle.prop1_violation = certify_stage("restricted_orthogonality", [&] {
    return check_restricted_orthogonality(
        problem.loss(), bundle.prop1_m_used, bundle.prop1_M_used,
        problem.rank(), options.lemma_trials, rng_seed ^ 0xc1u);
  });
  bundle.prop1_pass = bundle.prop1_violation <= 1e-10;

  const double m_hat = bundle.condition.m_hat;
  SolverConfig config;
  config.grad_tol = options.solver_grad_tol;
  config.max_iters = options.solver_max_iters;
  config.m_hat = m_hat;
  config.initial_step = 1.0 / bundle.condition.M_hat;
  const double init_scale = default_init_scale(problem);

  std::vector<StackedFactor> critical_points;
  std::vector<StackedFactor> lemma6_points;
  lemma6_points.push_back(
      StackedFactor::zero(problem.p(), problem.q(), problem.rank()));
  for (int s = 0; s < seeds; ++s) {
    config.rng_seed = rng_seed ^ (0x1000u + static_cast<std::uint64_t>(s));
    const StackedFactor w0 =
        random_init(problem.p(), problem.q(), problem.rank(), init_scale,
                    config.rng_seed ^ 0xabcu);
    const SolveResult result = certify_stage("solver", [&] {
      return perturbed_gradient_descent(problem, w0, config);
    });

    RunReport run;
    run.seed_index = s;
    run.status = result.trace.status;
    run.iterations = static_cast<long>(result.trace.records.size());
    run.perturbations = result.trace.perturbations;
    run.grad_norm = g_grad(problem, result.w).norm();
    run.balance_residual = balance_residual(result.w);
    const double star_norm = bundle.oracle.x_star.norm();
    run.phi_gap_rel = (phi(result.w) - bundle.oracle.x_star).norm() /
                      (star_norm > 0.0 ? star_norm : 1.0);
    run.classification = certify_stage("classification", [&] {
      return classify_critical_point(
          problem, result.w, bundle.oracle.x_star, m_hat, options.crit_tol,
          options.certify_slack,
          rng_seed ^ (0x2000u + static_cast<std::uint64_t>(s)));
    });
    switch (run.classification.classification) {
      case PointClass::GlobalFactorization: ++bundle.n_global; break;
      case PointClass::StrictSaddle: ++bundle.n_saddle; break;
      case PointClass::NotCritical: ++bundle.n_not_critical; break;
      case PointClass::Indeterminate: ++bundle.n_indeterminate; break;
    }
    if (run.classification.classification != PointClass::NotCritical &&
        run.grad_norm <= 1e-7) {
      critical_points.push_back(result.w);
      if (run.grad_norm <= options.polish_grad_tol) {
        lemma6_points.push_back(result.w);
      }
    }
    bundle.runs.push_back(std::move(run));
  }

  bundle.prop2 = certify_stage("proposition2", [&] {
    return verify_proposition_2(problem, critical_points, 1e-7);
  });
  bundle.prop3 = certify_stage("proposition3", [&] {
    return verify_proposition_3(problem, bundle.oracle.x_star,
                                options.prop3_trials, rng_seed ^ 0xc2u);
  });

  bundle.lemmas = certify_stage("balance_lemmas", [&] {
    return verify_balance_lemmas(options.lemma_trials, rng_seed ^ 0xc3u);
  });
  auto distance = certify_stage("distance_lemmas", [&] {
    return distance_lemma_suite(options.lemma_trials, rng_seed ^ 0xc4u, false);
  });
  for (auto& rep : distance) bundle.lemmas.push_back(std::move(rep));
  bundle.lemmas.push_back(certify_stage("lemma6", [&] {
    return verify_lemma_6(problem, bundle.oracle.x_star, m_hat,
                          bundle.condition.M_hat, lemma6_points);
  }));

  bool lemmas_pass = true;
  for (const auto& rep : bundle.lemmas) lemmas_pass &= rep.pass;
  bundle.all_pass = bundle.oracle.kkt_pass && bundle.condition_pass &&
                    bundle.prop1_pass && bundle.prop2.pass &&
                    bundle.prop3.pass && lemmas_pass &&
                    bundle.n_indeterminate == 0;
  return bundle;
}

namespace {

nlohmann::ordered_json lemma_to_json(const LemmaReport& rep) {
  return {{"id", rep.id},
          {"trials", rep.trials},
          {"max_violation", rep.max_violation},
          {"tolerance", rep.tolerance},
          {"pass", rep.pass},
          {"indeterminate", rep.indeterminate}};
}

nlohmann::ordered_json classification_to_json(const CriticalPointReport& rep) {
  return {{"class", to_string(rep.classification)},
          {"regime", to_string(rep.regime)},
          {"grad_norm", rep.grad_norm},
          {"balance_residual", rep.balance_residual},
          {"phi_gap", rep.phi_gap},
          {"lambda_min", rep.lambda_min},
          {"theorem_bound", rep.theorem_bound},
          {"margin", rep.margin},
          {"escape_curvature", rep.escape_curvature},
          {"m_used", rep.m_used}};
}

}  // namespace

std::string bundle_to_json(const CertificationBundle& bundle,
                           const std::string& config_echo) {
  nlohmann::ordered_json doc;
  doc["rng_algorithm"] = Rng::kAlgorithm;
  doc["rng_seed"] = bundle.rng_seed;
  doc["seeds"] = bundle.seeds;
  if (!config_echo.empty()) {
    doc["config"] = nlohmann::ordered_json::parse(config_echo);
  }
  doc["tolerances"] = {
      {"lemma_trials", bundle.options.lemma_trials},
      {"condition_trials", bundle.options.condition_trials},
      {"prop3_trials", bundle.options.prop3_trials},
      {"crit_tol", bundle.options.crit_tol},
      {"certify_slack", bundle.options.certify_slack},
      {"oracle_tol", bundle.options.oracle_tol},
      {"solver_grad_tol", bundle.options.solver_grad_tol},
      {"polish_grad_tol", bundle.options.polish_grad_tol}};
  doc["oracle"] = {{"rank_star", bundle.oracle.rank_star},
                   {"iterations", bundle.oracle.iterations},
                   {"objective", bundle.oracle.objective},
                   {"kkt_spectral_slack", bundle.oracle.kkt_spectral_slack},
                   {"subgradient_residual", bundle.oracle.subgradient_residual},
                   {"pass", bundle.oracle.kkt_pass}};
  doc["conditioning"] = {{"m_hat", bundle.condition.m_hat},
                         {"M_hat", bundle.condition.M_hat},
                         {"ratio", bundle.condition.ratio()},
                         {"trials", bundle.condition.trials},
                         {"verdict", bundle.condition_pass ? "PASS" : "FAIL"},
                         {"theorem_guarantees_void", bundle.guarantees_void}};
  doc["proposition1"] = {{"m_used", bundle.prop1_m_used},
                         {"M_used", bundle.prop1_M_used},
                         {"max_violation", bundle.prop1_violation},
                         {"pass", bundle.prop1_pass}};
  doc["runs"] = nlohmann::ordered_json::array();
  for (const auto& run : bundle.runs) {
    doc["runs"].push_back({{"seed_index", run.seed_index},
                           {"status", to_string(run.status)},
                           {"iterations", run.iterations},
                           {"perturbations", run.perturbations},
                           {"grad_norm", run.grad_norm},
                           {"balance_residual", run.balance_residual},
                           {"phi_gap_rel", run.phi_gap_rel},
                           {"classification",
                            classification_to_json(run.classification)}});
  }
  doc["counts"] = {{"global", bundle.n_global},
                   {"strict_saddle", bundle.n_saddle},
                   {"not_critical", bundle.n_not_critical},
                   {"indeterminate", bundle.n_indeterminate}};
  doc["proposition2"] = lemma_to_json(bundle.prop2);
  doc["proposition3"] = lemma_to_json(bundle.prop3);
  doc["lemmas"] = nlohmann::ordered_json::array();
  for (const auto& rep : bundle.lemmas) doc["lemmas"].push_back(lemma_to_json(rep));
  doc["all_pass"] = bundle.all_pass;
  return doc.dump(2) + "\n";
}

}  // namespace nnfac
