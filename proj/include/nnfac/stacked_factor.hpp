#pragma once

#include <stdexcept>
#include <utility>

#include <Eigen/Core>

namespace nnfac {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(what) +
                                ": non-finite entries are not admitted");
  }
}

// The factored-problem variable: a pair (U, V) held as the vertical stack
// W = [U; V] with U of size p x r and V of size q x r. Immutable after
// construction; all entries are finite by construction.
class StackedFactor {
 public:
  StackedFactor() = default;

  StackedFactor(const Matrix& u, const Matrix& v) {
    if (u.cols() != v.cols()) {
      throw std::invalid_argument(
          "StackedFactor: U and V must share a column count");
    }
    require_finite(u, "StackedFactor U");
    require_finite(v, "StackedFactor V");
    p_ = u.rows();
    w_.resize(u.rows() + v.rows(), u.cols());
    w_.topRows(u.rows()) = u;
    w_.bottomRows(v.rows()) = v;
  }

  static StackedFactor from_stacked(Matrix w, Eigen::Index p) {
    if (p < 0 || p > w.rows()) {
      throw std::invalid_argument("StackedFactor: invalid row split");
    }
    require_finite(w, "StackedFactor W");
    StackedFactor out;
    out.w_ = std::move(w);
    out.p_ = p;
    return out;
  }

  static StackedFactor zero(Eigen::Index p, Eigen::Index q, Eigen::Index r) {
    StackedFactor out;
    out.w_ = Matrix::Zero(p + q, r);
    out.p_ = p;
    return out;
  }

  Eigen::Index p() const { return p_; }
  Eigen::Index q() const { return w_.rows() - p_; }
  Eigen::Index rank() const { return w_.cols(); }

  auto U() const { return w_.topRows(p_); }
  auto V() const { return w_.bottomRows(w_.rows() - p_); }
  const Matrix& W() const { return w_; }

  // The sign-flipped stack [U; -V].
  Matrix hat() const {
    Matrix h = w_;
    h.bottomRows(q()) *= -1.0;
    return h;
  }

  double norm() const { return w_.norm(); }

  bool same_shape(const StackedFactor& other) const {
    return p_ == other.p_ && w_.rows() == other.w_.rows() &&
           w_.cols() == other.w_.cols();
  }

 private:
  Matrix w_;
  Eigen::Index p_ = 0;
};

inline double dot(const StackedFactor& a, const StackedFactor& b) {
  return a.W().cwiseProduct(b.W()).sum();
}

inline void require_same_shape(const StackedFactor& a, const StackedFactor& b,
                               const char* what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(what) +
                                ": stacked factors have mismatched shapes");
  }
}

}  // namespace nnfac
