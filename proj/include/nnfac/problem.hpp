#pragma once

#include <algorithm>
#include <stdexcept>

#include "nnfac/loss_model.hpp"

namespace nnfac {

// A regularized instance: loss f, trade-off weight lambda, and the factor rank
// used by the factored reformulation.
class Problem {
 public:
  Problem(LossPtr loss, double lambda, Eigen::Index rank)
      : loss_(std::move(loss)), lambda_(lambda), rank_(rank) {
    if (!loss_) {
      throw std::invalid_argument("Problem: null loss");
    }
    if (!(lambda_ > 0.0)) {
      throw std::invalid_argument("Problem: lambda must be positive");
    }
    if (rank_ < 1 || rank_ > std::min(loss_->rows(), loss_->cols())) {
      throw std::invalid_argument(
          "Problem: rank must lie in [1, min(p, q)]");
    }
  }

  const LossModel& loss() const { return *loss_; }
  const LossPtr& loss_ptr() const { return loss_; }
  double lambda() const { return lambda_; }
  Eigen::Index rank() const { return rank_; }
  Eigen::Index p() const { return loss_->rows(); }
  Eigen::Index q() const { return loss_->cols(); }

 private:
  LossPtr loss_;
  double lambda_;
  Eigen::Index rank_;
};

}  // namespace nnfac
