#pragma once

#include <cstdint>

#include "nnfac/loss_model.hpp"

namespace nnfac {

// A synthetic Gaussian sensing instance: n sensing matrices with N(0, 1/n)
// entries (so the sensing Hessian concentrates at the identity form), a
// planted low-rank ground truth with spectrum 1.5 down to 1.0, and consistent
// noiseless observations. lambda_suggested shrinks the recovered spectrum by
// roughly a tenth of the top singular value.
struct SensingInstance {
  Matrix sensing_stack;  // (n*p) x q
  Vector observations;   // length n
  Matrix x_true;         // p x q, rank `rank`
  double lambda_suggested;
};

SensingInstance generate_sensing_instance(Eigen::Index p, Eigen::Index q,
                                          Eigen::Index rank, Eigen::Index n,
                                          std::uint64_t seed);

}  // namespace nnfac
