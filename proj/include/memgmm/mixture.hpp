#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "memgmm/covariance.hpp"
#include "memgmm/errors.hpp"
#include "memgmm/parallel.hpp"
#include "memgmm/types.hpp"

namespace memgmm {

/// Index of entry (i, j), i >= j, in a row-packed lower triangle.
inline constexpr Index packed_index(Index i, Index j) { return i * (i + 1) / 2 + j; }
inline constexpr Index packed_size(Index d) { return d * (d + 1) / 2; }

/// Finite Gaussian mixture with fixed parameters. Construction validates the
/// parameters and caches per-component Cholesky factors, precisions and log
/// determinants; the object is immutable afterwards and safe to share.
template <typename Scalar>
class GaussianMixture {
 public:
  GaussianMixture(Vector<Scalar> weights, Matrix<Scalar> means, std::vector<Matrix<Scalar>> covariances,
                  ModelName model = ModelName::FREE)
      : weights_(std::move(weights)),
        means_(std::move(means)),
        covariances_(std::move(covariances)),
        model_(model) {
    validate_and_cache();
  }

  Index components() const { return weights_.size(); }
  Index dim() const { return means_.cols(); }
  ModelName model() const { return model_; }

  const Vector<Scalar>& weights() const { return weights_; }
  Scalar weight(Index k) const { return weights_(k); }
  /// G x d, row k is the mean of component k.
  const Matrix<Scalar>& means() const { return means_; }
  Vector<Scalar> mean(Index k) const { return means_.row(k).transpose(); }
  const std::vector<Matrix<Scalar>>& covariances() const { return covariances_; }
  const Matrix<Scalar>& covariance(Index k) const { return covariances_[k]; }
  /// Lower-triangular L with covariance(k) = L L^T.
  const Matrix<Scalar>& cholesky_factor(Index k) const { return factors_[k]; }
  const Matrix<Scalar>& precision(Index k) const { return precisions_[k]; }
  Scalar log_det(Index k) const { return log_dets_(k); }

  /// log pi_k - (d log(2 pi) + log|Sigma_k|) / 2.
  const Vector<Scalar>& log_normalizers() const { return log_normalizers_; }
  /// G x d(d+1)/2, row k is the packed lower triangle of precision(k).
  const Matrix<Scalar>& packed_precisions() const { return packed_precisions_; }
  /// G x d, row k is (precision(k) * mean(k))^T.
  const Matrix<Scalar>& precision_means() const { return precision_means_; }

 private:
  void validate_and_cache() {
    const Index G = weights_.size();
    const Index d = means_.cols();
    if (G < 1) throw ValidationError("weights: mixture needs at least one component");
    if (d < 1) throw ValidationError("means: dimension must be at least 1");
    if (means_.rows() != G) throw ValidationError("means: expected one row per component");
    if (static_cast<Index>(covariances_.size()) != G) {
      throw ValidationError("covariances: expected one matrix per component");
    }
    if (!means_.allFinite()) throw ValidationError("means: non-finite entry");
    for (Index k = 0; k < G; ++k) {
      if (!(weights_(k) > Scalar(0))) {
        throw ValidationError("weights/" + std::to_string(k) + ": must be positive");
      }
    }
    using std::abs;
    if (abs(weights_.sum() - Scalar(1)) > scaled_tolerance<Scalar>(1e-12)) {
      throw ValidationError("weights: must sum to 1");
    }

    const Scalar log_2pi = std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
    factors_.resize(G);
    precisions_.resize(G);
    log_dets_.resize(G);
    log_normalizers_.resize(G);
    packed_precisions_.resize(G, packed_size(d));
    precision_means_.resize(G, d);
    const Matrix<Scalar> eye = Matrix<Scalar>::Identity(d, d);
    for (Index k = 0; k < G; ++k) {
      const std::string where = "covariances/" + std::to_string(k);
      const Matrix<Scalar>& sigma = covariances_[k];
      if (sigma.rows() != d || sigma.cols() != d) throw ValidationError(where + ": must be d x d");
      if (!sigma.allFinite()) throw ValidationError(where + ": non-finite entry");
      const Scalar scale = std::max(Scalar(1), sigma.cwiseAbs().maxCoeff());
      if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > scaled_tolerance<Scalar>(1e-10) * scale) {
        throw ValidationError(where + ": not symmetric");
      }
      Eigen::LLT<Matrix<Scalar>> llt(sigma);
      if (llt.info() != Eigen::Success) throw ValidationError(where + ": not symmetric positive definite");
      factors_[k] = llt.matrixL();
      Matrix<Scalar> prec = llt.solve(eye);
      prec = (prec + prec.transpose()) / Scalar(2);
      if ((sigma * prec - eye).cwiseAbs().maxCoeff() >= scaled_tolerance<Scalar>(1e-8, 1e3)) {
        throw ValidationError(where + ": too ill-conditioned to invert accurately");
      }
      precisions_[k] = prec;
      log_dets_(k) = Scalar(2) * factors_[k].diagonal().array().log().sum();
      log_normalizers_(k) = std::log(weights_(k)) - Scalar(0.5) * (Scalar(d) * log_2pi + log_dets_(k));
      for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j <= i; ++j) packed_precisions_(k, packed_index(i, j)) = prec(i, j);
      }
      precision_means_.row(k) = (prec * means_.row(k).transpose()).transpose();
    }
  }

  Vector<Scalar> weights_;
  Matrix<Scalar> means_;
  std::vector<Matrix<Scalar>> covariances_;
  ModelName model_;

  std::vector<Matrix<Scalar>> factors_;
  std::vector<Matrix<Scalar>> precisions_;
  Vector<Scalar> log_dets_;
  Vector<Scalar> log_normalizers_;
  Matrix<Scalar> packed_precisions_;
  Matrix<Scalar> precision_means_;
};

/// n x G matrix of posterior component probabilities z_ik; rows sum to one.
template <typename Scalar>
using Responsibilities = Matrix<Scalar>;

template <typename Scalar>
struct MarginalMoments {
  Vector<Scalar> mean;
  Matrix<Scalar> covariance;
};

namespace detail {

template <typename Scalar>
void check_points(const GaussianMixture<Scalar>& mixture, const Matrix<Scalar>& points) {
  if (points.cols() != mixture.dim()) {
    throw ValidationError("points have " + std::to_string(points.cols()) + " columns, mixture dimension is " +
                          std::to_string(mixture.dim()));
  }
}

/// Writes log pi_k + log phi(x_i; mu_k, Sigma_k) into out (rows x G).
/// Forward substitution runs column-wise across the block's rows.
template <typename Scalar, typename PointsBlock, typename OutBlock>
void component_log_terms_block(const GaussianMixture<Scalar>& mixture, const PointsBlock& points, OutBlock&& out) {
  const Index rows = points.rows();
  const Index d = mixture.dim();
  Matrix<Scalar> y(rows, d);
  Array<Scalar> maha(rows);
  for (Index k = 0; k < mixture.components(); ++k) {
    const Matrix<Scalar>& L = mixture.cholesky_factor(k);
    const auto& mu = mixture.means();
    maha.setZero();
    for (Index j = 0; j < d; ++j) {
      auto yj = y.col(j).array();
      yj = points.col(j).array() - mu(k, j);
      for (Index l = 0; l < j; ++l) yj -= L(j, l) * y.col(l).array();
      yj /= L(j, j);
      maha += yj.square();
    }
    out.col(k).array() = mixture.log_normalizers()(k) - Scalar(0.5) * maha;
  }
}

/// Row-wise log-sum-exp of terms (rows x G), centered on the row maximum.
template <typename Scalar, typename TermsBlock>
Array<Scalar> row_log_sum_exp(const TermsBlock& terms, Index first_row) {
  const Index rows = terms.rows();
  Array<Scalar> top = terms.col(0).array();
  for (Index k = 1; k < terms.cols(); ++k) top = top.max(terms.col(k).array());
  for (Index i = 0; i < rows; ++i) {
    if (!std::isfinite(static_cast<double>(top(i)))) {
      throw NumericalError("log-density of point " + std::to_string(first_row + i) + " is not finite");
    }
  }
  Array<Scalar> sum = Array<Scalar>::Zero(rows);
  for (Index k = 0; k < terms.cols(); ++k) sum += (terms.col(k).array() - top).exp();
  return top + sum.log();
}

template <typename Scalar, typename PointsBlock, typename OutBlock>
void posteriors_block(const GaussianMixture<Scalar>& mixture, const PointsBlock& points, OutBlock&& z,
                      Index first_row) {
  component_log_terms_block(mixture, points, z);
  const Array<Scalar> lse = row_log_sum_exp<Scalar>(z, first_row);
  for (Index k = 0; k < z.cols(); ++k) z.col(k).array() = (z.col(k).array() - lse).exp();
}

}  // namespace detail

/// n x G matrix of log pi_k + log phi(x_i; mu_k, Sigma_k).
template <typename Scalar>
Matrix<Scalar> component_log_terms(const GaussianMixture<Scalar>& mixture, const Matrix<Scalar>& points,
                                   int threads = 1) {
  detail::check_points(mixture, points);
  Matrix<Scalar> out(points.rows(), mixture.components());
  detail::for_each_row_block(points.rows(), threads, [&](Index begin, Index size) {
    detail::component_log_terms_block(mixture, points.middleRows(begin, size), out.middleRows(begin, size));
  });
  return out;
}

/// log f(x_i) for every row of points, via log-sum-exp over components.
template <typename Scalar>
Vector<Scalar> log_density(const GaussianMixture<Scalar>& mixture, const Matrix<Scalar>& points, int threads = 1) {
  detail::check_points(mixture, points);
  Vector<Scalar> out(points.rows());
  detail::for_each_row_block(points.rows(), threads, [&](Index begin, Index size) {
    Matrix<Scalar> terms(size, mixture.components());
    detail::component_log_terms_block(mixture, points.middleRows(begin, size), terms);
    out.segment(begin, size) = detail::row_log_sum_exp<Scalar>(terms, begin).matrix();
  });
  return out;
}

template <typename Scalar>
Scalar log_density(const GaussianMixture<Scalar>& mixture, const Vector<Scalar>& x) {
  Matrix<Scalar> row = x.transpose();
  return log_density(mixture, row)(0);
}

/// E-step: posterior component probabilities, computed in log space so that
/// points far from every component still get normalized rows.
template <typename Scalar>
Responsibilities<Scalar> component_posteriors(const GaussianMixture<Scalar>& mixture, const Matrix<Scalar>& points,
                                              int threads = 1) {
  detail::check_points(mixture, points);
  Responsibilities<Scalar> z(points.rows(), mixture.components());
  detail::for_each_row_block(points.rows(), threads, [&](Index begin, Index size) {
    detail::posteriors_block(mixture, points.middleRows(begin, size), z.middleRows(begin, size), begin);
  });
  return z;
}

/// MAP component per point; ties go to the lowest index.
template <typename Scalar>
LabelVector map_component_labels(const GaussianMixture<Scalar>& mixture, const Matrix<Scalar>& points,
                                 int threads = 1) {
  const Matrix<Scalar> terms = component_log_terms(mixture, points, threads);
  LabelVector labels(static_cast<size_t>(points.rows()));
  for (Index i = 0; i < terms.rows(); ++i) {
    Index best = 0;
    for (Index k = 1; k < terms.cols(); ++k) {
      if (terms(i, k) > terms(i, best)) best = k;
    }
    labels[static_cast<size_t>(i)] = best;
  }
  return labels;
}

/// Mean and covariance of the mixture distribution as a whole.
template <typename Scalar>
MarginalMoments<Scalar> marginal_moments(const GaussianMixture<Scalar>& mixture) {
  const Index d = mixture.dim();
  MarginalMoments<Scalar> m;
  m.mean = (mixture.weights().transpose() * mixture.means()).transpose();
  m.covariance = Matrix<Scalar>::Zero(d, d);
  for (Index k = 0; k < mixture.components(); ++k) {
    const Vector<Scalar> dev = mixture.mean(k) - m.mean;
    m.covariance += mixture.weight(k) * (mixture.covariance(k) + dev * dev.transpose());
  }
  m.covariance = (m.covariance + m.covariance.transpose()) / Scalar(2);
  return m;
}

using GaussianMixtured = GaussianMixture<double>;

}  // namespace memgmm
