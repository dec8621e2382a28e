#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "memgmm/errors.hpp"
#include "memgmm/types.hpp"

namespace memgmm {

/// Parsimonious covariance model codes (volume, shape, orientation with
/// E = equal, V = varying, I = identity). FREE marks an unconstrained input
/// that claims no code.
enum class ModelName {
  EII, VII, EEI, VEI, EVI, VVI, EEE, VEE, EVE, VVE, EEV, VEV, EVV, VVV, FREE
};

inline constexpr std::array<ModelName, 15> kAllModelNames = {
    ModelName::EII, ModelName::VII, ModelName::EEI, ModelName::VEI, ModelName::EVI,
    ModelName::VVI, ModelName::EEE, ModelName::VEE, ModelName::EVE, ModelName::VVE,
    ModelName::EEV, ModelName::VEV, ModelName::EVV, ModelName::VVV, ModelName::FREE};

inline std::string_view to_string(ModelName m) {
  switch (m) {
    case ModelName::EII: return "EII";
    case ModelName::VII: return "VII";
    case ModelName::EEI: return "EEI";
    case ModelName::VEI: return "VEI";
    case ModelName::EVI: return "EVI";
    case ModelName::VVI: return "VVI";
    case ModelName::EEE: return "EEE";
    case ModelName::VEE: return "VEE";
    case ModelName::EVE: return "EVE";
    case ModelName::VVE: return "VVE";
    case ModelName::EEV: return "EEV";
    case ModelName::VEV: return "VEV";
    case ModelName::EVV: return "EVV";
    case ModelName::VVV: return "VVV";
    case ModelName::FREE: return "FREE";
  }
  return "FREE";
}

inline std::optional<ModelName> parse_model_name(std::string_view s) {
  for (ModelName m : kAllModelNames) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

/// Volume / shape / orientation factors of one covariance matrix:
/// Sigma = volume * orientation * diag(shape) * orientation^T.
template <typename Scalar>
struct CovarianceSpec {
  Scalar volume{1};
  Vector<Scalar> shape;        // decreasing, positive, product 1
  Matrix<Scalar> orientation;  // orthogonal, columns are the axes

  Index dim() const { return shape.size(); }

  /// Throws ValidationError naming the first violated invariant.
  void validate() const {
    const Index d = shape.size();
    if (d < 1) throw ValidationError("covariance spec: empty shape");
    if (orientation.rows() != d || orientation.cols() != d) {
      throw ValidationError("covariance spec: orientation must be d x d");
    }
    if (!(volume > Scalar(0)) || !std::isfinite(static_cast<double>(volume))) {
      throw ValidationError("covariance spec: volume must be positive");
    }
    for (Index j = 0; j < d; ++j) {
      if (!(shape(j) > Scalar(0))) {
        throw ValidationError("covariance spec: shape entries must be strictly positive");
      }
      if (j > 0 && shape(j) > shape(j - 1)) {
        throw ValidationError("covariance spec: shape entries must be non-increasing");
      }
    }
    using std::abs;
    if (abs(shape.prod() - Scalar(1)) > scaled_tolerance<Scalar>(1e-10)) {
      throw ValidationError("covariance spec: shape determinant must equal 1");
    }
    const Matrix<Scalar> gram = orientation.transpose() * orientation;
    if ((gram - Matrix<Scalar>::Identity(d, d)).cwiseAbs().maxCoeff() > scaled_tolerance<Scalar>(1e-10)) {
      throw ValidationError("covariance spec: orientation must be orthogonal");
    }
  }
};

template <typename Scalar>
Matrix<Scalar> build_covariance(const CovarianceSpec<Scalar>& spec) {
  spec.validate();
  Matrix<Scalar> sigma =
      spec.volume * spec.orientation * spec.shape.asDiagonal() * spec.orientation.transpose();
  // Symmetrize away rounding in the triple product.
  return (sigma + sigma.transpose()) / Scalar(2);
}

/// Eigen-decomposes an SPD matrix into volume, normalized shape (decreasing)
/// and orientation. Each eigenvector is signed so its first nonzero
/// coordinate is positive.
template <typename Scalar>
CovarianceSpec<Scalar> decompose_covariance(const Matrix<Scalar>& sigma) {
  const Index d = sigma.rows();
  if (d < 1 || sigma.cols() != d) throw ValidationError("decompose_covariance: matrix must be square");
  Eigen::LLT<Matrix<Scalar>> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("decompose_covariance: matrix is not symmetric positive definite");
  }
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(sigma);
  if (es.info() != Eigen::Success) throw NumericalError("decompose_covariance: eigensolver failed");

  // Eigen returns ascending order; reverse.
  Vector<Scalar> values = es.eigenvalues().reverse();
  Matrix<Scalar> vectors = es.eigenvectors().rowwise().reverse();
  if (!(values(d - 1) > Scalar(0))) {
    throw NumericalError("decompose_covariance: non-positive eigenvalue");
  }

  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) {
      using std::abs;
      if (abs(vectors(i, j)) > Scalar(1e-14)) {
        if (vectors(i, j) < Scalar(0)) vectors.col(j) = -vectors.col(j);
        break;
      }
    }
  }

  using std::exp;
  using std::log;
  const Scalar log_volume = values.array().log().sum() / Scalar(d);
  CovarianceSpec<Scalar> spec;
  spec.volume = exp(log_volume);
  spec.shape = (values.array().log() - log_volume).exp().matrix();
  spec.orientation = vectors;
  return spec;
}

}  // namespace memgmm
