#include "nnfac/instance_gen.hpp"

#include <cmath>
#include <stdexcept>

#include "nnfac/rng.hpp"
#include "nnfac/spectral.hpp"

namespace nnfac {

SensingInstance generate_sensing_instance(Eigen::Index p, Eigen::Index q,
                                          Eigen::Index rank, Eigen::Index n,
                                          std::uint64_t seed) {
  if (p < 1 || q < 1 || rank < 1 || rank > std::min(p, q) || n < 1) {
    throw std::invalid_argument("generate_sensing_instance: invalid sizes");
  }
  Rng rng(seed);

  // Ground truth with a controlled spectrum from 1.5 down to 1.0.
  Vector spectrum(rank);
  for (Eigen::Index i = 0; i < rank; ++i) {
    spectrum(i) =
        rank == 1 ? 1.5 : 1.5 - 0.5 * static_cast<double>(i) / (rank - 1);
  }
  const Matrix left = rng.orthogonal(p).leftCols(rank);
  const Matrix right = rng.orthogonal(q).leftCols(rank);
  SensingInstance out;
  out.x_true = left * spectrum.asDiagonal() * right.transpose();

  const double stddev = 1.0 / std::sqrt(static_cast<double>(n));
  out.sensing_stack = rng.gaussian_matrix(n * p, q, stddev);
  out.observations.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.observations(i) = out.sensing_stack.middleRows(i * p, p)
                              .cwiseProduct(out.x_true)
                              .sum();
  }

  // grad f(0) = -sum_i b_i A_i; its spectral norm sets the scale above which
  // lambda would zero the solution outright.
  Matrix grad0 = Matrix::Zero(p, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    grad0 -= out.observations(i) * out.sensing_stack.middleRows(i * p, p);
  }
  out.lambda_suggested = 0.1 * spectral_norm(grad0);
  return out;
}

}  // namespace nnfac
