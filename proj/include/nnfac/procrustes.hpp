#pragma once

#include "nnfac/stacked_factor.hpp"

namespace nnfac {

// Distance between rotation classes of stacked factors,
// min over orthogonal R of ||W1 - W2 R||_F, together with the minimizer.
struct ProcrustesResult {
  double distance;
  Matrix rotation;  // r x r orthogonal
};

ProcrustesResult procrustes_distance(const StackedFactor& w1,
                                     const StackedFactor& w2);

// Block projections of W1 W2^T. p_on keeps the diagonal blocks
// [U1 U2^T, 0; 0, V1 V2^T], p_off the off-diagonal complement; they sum to
// W1 W2^T exactly.
Matrix p_on(const StackedFactor& w1, const StackedFactor& w2);
Matrix p_off(const StackedFactor& w1, const StackedFactor& w2);

}  // namespace nnfac
