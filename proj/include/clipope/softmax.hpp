#pragma once

#include <Eigen/Core>

#include "clipope/error.hpp"

namespace clipope {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// exp(s_j) / sum_k exp(s_k), evaluated after subtracting max_k s_k so the
/// result is finite and strictly positive for any finite scores.
template <typename Derived>
VectorX<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& scores) {
  using Scalar = typename Derived::Scalar;
  if (scores.size() == 0) {
    throw InputError("softmax of an empty score vector");
  }
  if (!scores.allFinite()) {
    throw NumericError("softmax scores must be finite");
  }
  VectorX<Scalar> p = (scores.array() - scores.maxCoeff()).exp().matrix();
  p /= p.sum();
  return p;
}

}  // namespace clipope
