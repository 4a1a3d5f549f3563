#pragma once

#include <cstdint>

#include "nnfac/loss_model.hpp"

namespace nnfac {

// Sampled sandwich constants for the restricted Hessian of a loss: extremes of
// the Rayleigh quotient [Hess f(X)](D, D) / ||D||_F^2 over random X of rank at
// most 2r and D of rank at most 4r (each a product of Gaussian factors,
// normalized). Sampled, so m_hat >= m and M_hat <= M; the ratio is what the
// well-conditioning gate inspects.
struct ConditionEstimate {
  double m_hat;
  double M_hat;
  int trials;
  std::uint64_t seed;

  double ratio() const { return M_hat / m_hat; }
};

ConditionEstimate estimate_restricted_condition(const LossModel& loss,
                                                Eigen::Index r, int trials,
                                                std::uint64_t rng_seed);

// Largest sampled violation of the restricted-orthogonality inequality
//   |2/(M+m) [Hess f(X)](G, H) - <G, H>| <= (M-m)/(M+m) ||G||_F ||H||_F
// over random rank <= 2r triples (X, G, H). Nonpositive values certify the
// sampled inequality.
double check_restricted_orthogonality(const LossModel& loss, double m, double M,
                                      Eigen::Index r, int trials,
                                      std::uint64_t rng_seed);

}  // namespace nnfac
