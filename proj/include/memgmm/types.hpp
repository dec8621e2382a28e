#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace memgmm {

using Index = Eigen::Index;

/// Column vector of dynamic length.
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Dense column-major matrix. Point sets are stored n x d, so each
/// coordinate is a contiguous column and row-wise work vectorizes over points.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// Absolute tolerance `tol` for double, widened to a multiple of machine
/// epsilon for lower-precision scalars.
template <typename Scalar>
constexpr Scalar scaled_tolerance(double tol, double eps_multiple = 100.0) {
  return std::max(static_cast<Scalar>(tol),
                  static_cast<Scalar>(eps_multiple) * std::numeric_limits<Scalar>::epsilon());
}

/// Zero-based labels (component, mode or cluster indices) per point.
using LabelVector = std::vector<Index>;

}  // namespace memgmm
