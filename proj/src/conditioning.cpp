#include "nnfac/conditioning.hpp"

#include <algorithm>
#include <stdexcept>

#include "nnfac/rng.hpp"

namespace nnfac {
namespace {

// Random rank <= width matrix with unit Frobenius norm.
Matrix random_low_rank(Rng& rng, Eigen::Index p, Eigen::Index q,
                       Eigen::Index width) {
  const Eigen::Index w = std::min(width, std::min(p, q));
  Matrix x = rng.gaussian_matrix(p, w) * rng.gaussian_matrix(q, w).transpose();
  const double norm = x.norm();
  if (norm > 0.0) x /= norm;
  return x;
}

}  // namespace

ConditionEstimate estimate_restricted_condition(const LossModel& loss,
                                                Eigen::Index r, int trials,
                                                std::uint64_t rng_seed) {
  if (trials < 1) {
    throw std::invalid_argument(
        "estimate_restricted_condition: trials must be >= 1");
  }
  if (r < 1) {
    throw std::invalid_argument("estimate_restricted_condition: rank must be >= 1");
  }
  const Eigen::Index p = loss.rows(), q = loss.cols();
  double lo = 0.0, hi = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng = Rng::substream(rng_seed, static_cast<std::uint64_t>(t));
    const Matrix x = random_low_rank(rng, p, q, 2 * r);
    const Matrix d = random_low_rank(rng, p, q, 4 * r);
    const double rayleigh = loss.hess_bilinear(x, d, d) / d.squaredNorm();
    if (t == 0) {
      lo = hi = rayleigh;
    } else {
      lo = std::min(lo, rayleigh);
      hi = std::max(hi, rayleigh);
    }
  }
  return {lo, hi, trials, rng_seed};
}

double check_restricted_orthogonality(const LossModel& loss, double m, double M,
                                      Eigen::Index r, int trials,
                                      std::uint64_t rng_seed) {
  if (!(0.0 < m && m <= M)) {
    throw std::invalid_argument(
        "check_restricted_orthogonality: need 0 < m <= M");
  }
  const Eigen::Index p = loss.rows(), q = loss.cols();
  const double center = 2.0 / (M + m);
  const double radius = (M - m) / (M + m);
  double worst = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    Rng rng = Rng::substream(rng_seed, static_cast<std::uint64_t>(t));
    const Matrix x = random_low_rank(rng, p, q, 2 * r);
    const Matrix g = random_low_rank(rng, p, q, 2 * r);
    const Matrix h = random_low_rank(rng, p, q, 2 * r);
    const double left =
        std::abs(center * loss.hess_bilinear(x, g, h) - g.cwiseProduct(h).sum());
    const double right = radius * g.norm() * h.norm();
    worst = std::max(worst, left - right);
  }
  return worst;
}

}  // namespace nnfac
