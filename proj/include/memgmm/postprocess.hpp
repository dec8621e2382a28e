#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include "memgmm/errors.hpp"
#include "memgmm/mixture.hpp"
#include "memgmm/modal_em.hpp"
#include "memgmm/types.hpp"
#include "memgmm/union_find.hpp"

namespace memgmm {

enum class VolumeMethod { data_box, pca_box, gaussian_ellipsoid, min_of };

inline std::string_view to_string(VolumeMethod m) {
  switch (m) {
    case VolumeMethod::data_box: return "data_box";
    case VolumeMethod::pca_box: return "pca_box";
    case VolumeMethod::gaussian_ellipsoid: return "gaussian_ellipsoid";
    case VolumeMethod::min_of: return "min_of";
  }
  return "";
}

/// Which data-region volume the denoising step compares mode densities to.
enum class DenoiseMethod { none, gaussian, data_box, pca_box, min_of };

inline std::string_view to_string(DenoiseMethod m) {
  switch (m) {
    case DenoiseMethod::none: return "none";
    case DenoiseMethod::gaussian: return "gaussian";
    case DenoiseMethod::data_box: return "databox";
    case DenoiseMethod::pca_box: return "pcabox";
    case DenoiseMethod::min_of: return "min";
  }
  return "";
}

inline std::optional<DenoiseMethod> parse_denoise_method(std::string_view s) {
  for (auto m : {DenoiseMethod::none, DenoiseMethod::gaussian, DenoiseMethod::data_box, DenoiseMethod::pca_box,
                 DenoiseMethod::min_of}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

template <typename Scalar>
struct VolumeEstimate {
  Scalar log_volume{0};
  VolumeMethod method = VolumeMethod::data_box;
  double alpha = 0.01;  // meaningful for gaussian_ellipsoid and min_of
};

/// Merged modes and the point-to-mode map.
template <typename Scalar>
struct ModeSet {
  Matrix<Scalar> modes;  // M x d
  LabelVector assignment;
  Vector<Scalar> mode_log_density;  // empty until evaluated against a mixture

  Index size() const { return modes.rows(); }
};

template <typename Scalar>
struct ModalPartition {
  /// Zero-based index into modes_retained for every point.
  LabelVector labels;
  Matrix<Scalar> modes_retained;
  Vector<Scalar> retained_log_density;
  Matrix<Scalar> modes_dropped;
  Vector<Scalar> dropped_log_density;
  /// Unset when no denoising was applied.
  std::optional<Scalar> log_volume_used;
  /// Points whose mode was dropped and which were moved to a retained mode.
  std::vector<Index> reassigned;
  /// Every mode fell at or below the threshold, so none were dropped.
  bool all_modes_below_threshold = false;

  Index clusters() const { return modes_retained.rows(); }
};

namespace detail {

/// Unites every pair of rows of `points` within tol of each other, comparing
/// only pairs that are close along the first coordinate.
template <typename Scalar, typename Unite>
void sweep_close_pairs(const Matrix<Scalar>& points, Scalar tol, Unite&& unite) {
  const Index n = points.rows();
  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return points(a, 0) < points(b, 0); });
  const Scalar tol2 = tol * tol;
  for (size_t a = 0; a < order.size(); ++a) {
    const Index i = order[a];
    for (size_t b = a + 1; b < order.size(); ++b) {
      const Index j = order[b];
      if (points(j, 0) - points(i, 0) > tol) break;
      if ((points.row(i) - points.row(j)).squaredNorm() <= tol2) unite(i, j);
    }
  }
}

}  // namespace detail

/// Groups points lying within merge_tol of each other (transitively) and
/// replaces every group by its mean. Groups whose means end up within
/// merge_tol are merged again, so the returned modes are pairwise farther
/// apart than merge_tol. Modes are numbered by the smallest point index they
/// contain.
template <typename Scalar>
ModeSet<Scalar> merge_tight_clusters(const Matrix<Scalar>& points, Scalar merge_tol) {
  if (!(merge_tol > Scalar(0))) throw ValidationError("merge_tight_clusters: tolerance must be positive");
  const Index n = points.rows();
  const Index d = points.cols();
  UnionFind uf(n);
  detail::sweep_close_pairs(points, merge_tol, [&](Index i, Index j) { uf.unite(i, j); });

  ModeSet<Scalar> out;
  for (;;) {
    out.assignment.assign(static_cast<size_t>(n), -1);
    std::vector<Index> root_label(static_cast<size_t>(n), -1);
    std::vector<Index> representative;
    Index m = 0;
    for (Index i = 0; i < n; ++i) {
      const Index r = uf.find(i);
      if (root_label[static_cast<size_t>(r)] < 0) {
        root_label[static_cast<size_t>(r)] = m++;
        representative.push_back(i);
      }
      out.assignment[static_cast<size_t>(i)] = root_label[static_cast<size_t>(r)];
    }
    out.modes = Matrix<Scalar>::Zero(m, d);
    std::vector<Index> counts(static_cast<size_t>(m), 0);
    for (Index i = 0; i < n; ++i) {
      const Index label = out.assignment[static_cast<size_t>(i)];
      out.modes.row(label) += points.row(i);
      ++counts[static_cast<size_t>(label)];
    }
    for (Index k = 0; k < m; ++k) out.modes.row(k) /= Scalar(counts[static_cast<size_t>(k)]);

    bool merged = false;
    detail::sweep_close_pairs(out.modes, merge_tol, [&](Index a, Index b) {
      merged = uf.unite(representative[static_cast<size_t>(a)], representative[static_cast<size_t>(b)]) || merged;
    });
    if (!merged) return out;
  }
}

/// Log-volume of the axis-aligned box spanned by the data.
template <typename Scalar>
VolumeEstimate<Scalar> log_volume_data_box(const Matrix<Scalar>& data) {
  if (data.rows() < 2) throw ValidationError("log_volume_data_box: need at least two points");
  Scalar log_volume(0);
  for (Index j = 0; j < data.cols(); ++j) {
    const Scalar range = data.col(j).maxCoeff() - data.col(j).minCoeff();
    if (!(range > Scalar(0))) {
      throw DegenerateDataError("log_volume_data_box: coordinate " + std::to_string(j) + " has zero range");
    }
    log_volume += std::log(range);
  }
  return {log_volume, VolumeMethod::data_box, 0.0};
}

/// Log-volume of the box spanned by the principal component scores.
template <typename Scalar>
VolumeEstimate<Scalar> log_volume_pca_box(const Matrix<Scalar>& data) {
  if (data.rows() < 2) throw ValidationError("log_volume_pca_box: need at least two points");
  const Matrix<Scalar> centered = data.rowwise() - data.colwise().mean();
  const Matrix<Scalar> cov = centered.transpose() * centered / Scalar(data.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(cov);
  if (es.info() != Eigen::Success) throw NumericalError("log_volume_pca_box: eigensolver failed");
  const Vector<Scalar>& ev = es.eigenvalues();
  if (!(ev(0) > Scalar(1e-12) * ev(ev.size() - 1))) {
    throw DegenerateDataError("log_volume_pca_box: sample covariance is rank deficient");
  }
  VolumeEstimate<Scalar> v = log_volume_data_box<Scalar>(centered * es.eigenvectors());
  v.method = VolumeMethod::pca_box;
  return v;
}

/// Quantile of the chi-squared distribution with `dof` degrees of freedom.
inline double chi_squared_quantile(double probability, int dof) {
  boost::math::chi_squared_distribution<double> dist(static_cast<double>(dof));
  return boost::math::quantile(dist, probability);
}

/// Log-volume of the central (1 - alpha) ellipsoid of a Gaussian with the
/// mixture's marginal covariance.
template <typename Scalar>
VolumeEstimate<Scalar> log_volume_gaussian_ellipsoid(const GaussianMixture<Scalar>& mixture, double alpha = 0.01) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("log_volume_gaussian_ellipsoid: alpha must be in (0,1)");
  const Matrix<Scalar> sigma = marginal_moments(mixture).covariance;
  Eigen::LLT<Matrix<Scalar>> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("marginal covariance is not positive definite");
  const Scalar log_det = Scalar(2) * Matrix<Scalar>(llt.matrixL()).diagonal().array().log().sum();
  const int d = static_cast<int>(mixture.dim());
  const double half_d = 0.5 * d;
  const double log_v = std::log(2.0) + half_d * std::log(std::numbers::pi) - std::log(static_cast<double>(d)) -
                       std::lgamma(half_d) + half_d * std::log(chi_squared_quantile(1.0 - alpha, d));
  return {static_cast<Scalar>(log_v) + Scalar(0.5) * log_det, VolumeMethod::gaussian_ellipsoid, alpha};
}

/// Smallest of the data box, PCA box and Gaussian ellipsoid log-volumes.
template <typename Scalar>
VolumeEstimate<Scalar> log_volume_min_of(const GaussianMixture<Scalar>& mixture, const Matrix<Scalar>& data,
                                         double alpha = 0.01) {
  const Scalar v = std::min({log_volume_data_box(data).log_volume, log_volume_pca_box(data).log_volume,
                             log_volume_gaussian_ellipsoid(mixture, alpha).log_volume});
  return {v, VolumeMethod::min_of, alpha};
}

/// Log-density level of a uniform distribution over the region.
template <typename Scalar>
Scalar density_threshold(const VolumeEstimate<Scalar>& v) {
  return -v.log_volume;
}

/// Drops modes whose log-density does not exceed -log V. Points of dropped
/// modes go to the retained mode nearest the dropped one in Mahalanobis
/// distance under the marginal covariance. If every mode is below the
/// threshold all are kept and the partition is flagged.
template <typename Scalar>
ModalPartition<Scalar> denoise_modes(const ModeSet<Scalar>& modeset, const GaussianMixture<Scalar>& mixture,
                                     const VolumeEstimate<Scalar>& volume) {
  const Index m = modeset.size();
  if (m == 0) throw ValidationError("denoise_modes: empty mode set");
  detail::check_points(mixture, modeset.modes);
  const Vector<Scalar> logf =
      modeset.mode_log_density.size() == m ? modeset.mode_log_density : log_density(mixture, modeset.modes);

  const Scalar threshold = density_threshold(volume);
  std::vector<bool> keep(static_cast<size_t>(m));
  Index kept = 0;
  for (Index k = 0; k < m; ++k) {
    keep[static_cast<size_t>(k)] = logf(k) > threshold;
    kept += keep[static_cast<size_t>(k)] ? 1 : 0;
  }

  ModalPartition<Scalar> out;
  out.log_volume_used = volume.log_volume;
  if (kept == 0) {
    out.all_modes_below_threshold = true;
    std::fill(keep.begin(), keep.end(), true);
    kept = m;
  }

  std::vector<Index> new_label(static_cast<size_t>(m), -1);
  out.modes_retained.resize(kept, modeset.modes.cols());
  out.retained_log_density.resize(kept);
  out.modes_dropped.resize(m - kept, modeset.modes.cols());
  out.dropped_log_density.resize(m - kept);
  Index r = 0, q = 0;
  for (Index k = 0; k < m; ++k) {
    if (keep[static_cast<size_t>(k)]) {
      new_label[static_cast<size_t>(k)] = r;
      out.modes_retained.row(r) = modeset.modes.row(k);
      out.retained_log_density(r++) = logf(k);
    } else {
      out.modes_dropped.row(q) = modeset.modes.row(k);
      out.dropped_log_density(q++) = logf(k);
    }
  }

  if (kept < m) {
    Eigen::LLT<Matrix<Scalar>> llt(marginal_moments(mixture).covariance);
    if (llt.info() != Eigen::Success) throw NumericalError("marginal covariance is not positive definite");
    for (Index k = 0; k < m; ++k) {
      if (keep[static_cast<size_t>(k)]) continue;
      Index best = 0;
      Scalar best_dist = std::numeric_limits<Scalar>::infinity();
      for (Index j = 0; j < kept; ++j) {
        const Vector<Scalar> diff = (modeset.modes.row(k) - out.modes_retained.row(j)).transpose();
        const Scalar dist = Vector<Scalar>(llt.matrixL().solve(diff)).squaredNorm();
        if (dist < best_dist) {
          best_dist = dist;
          best = j;
        }
      }
      new_label[static_cast<size_t>(k)] = best;
    }
  }

  out.labels.resize(modeset.assignment.size());
  for (size_t i = 0; i < modeset.assignment.size(); ++i) {
    const Index mode = modeset.assignment[i];
    out.labels[i] = new_label[static_cast<size_t>(mode)];
    if (!keep[static_cast<size_t>(mode)]) out.reassigned.push_back(static_cast<Index>(i));
  }
  return out;
}

/// Partition with every mode retained, used when denoising is off.
template <typename Scalar>
ModalPartition<Scalar> partition_without_denoising(const ModeSet<Scalar>& modeset,
                                                   const GaussianMixture<Scalar>& mixture) {
  ModalPartition<Scalar> out;
  out.labels = modeset.assignment;
  out.modes_retained = modeset.modes;
  out.retained_log_density = modeset.mode_log_density.size() == modeset.size()
                                 ? modeset.mode_log_density
                                 : log_density(mixture, modeset.modes);
  out.modes_dropped.resize(0, modeset.modes.cols());
  out.dropped_log_density.resize(0);
  return out;
}

/// One percent of the average marginal standard deviation.
template <typename Scalar>
Scalar default_merge_tolerance(const GaussianMixture<Scalar>& mixture) {
  const Matrix<Scalar> sigma = marginal_moments(mixture).covariance;
  return Scalar(1e-2) * std::sqrt(sigma.trace() / Scalar(mixture.dim()));
}

struct ClusterConfig {
  MemConfig mem;
  /// Unset means default_merge_tolerance.
  std::optional<double> merge_tolerance;
  DenoiseMethod denoise = DenoiseMethod::gaussian;
  double alpha = 0.01;
};

template <typename Scalar>
struct ModalClusterResult {
  MemResult<Scalar> mem;
  ModeSet<Scalar> modes;
  ModalPartition<Scalar> partition;
  Scalar merge_tolerance{0};
  std::optional<VolumeEstimate<Scalar>> volume;
};

template <typename Scalar>
VolumeEstimate<Scalar> estimate_volume(DenoiseMethod method, const GaussianMixture<Scalar>& mixture,
                                       const Matrix<Scalar>& data, double alpha) {
  switch (method) {
    case DenoiseMethod::gaussian: return log_volume_gaussian_ellipsoid(mixture, alpha);
    case DenoiseMethod::data_box: return log_volume_data_box(data);
    case DenoiseMethod::pca_box: return log_volume_pca_box(data);
    case DenoiseMethod::min_of: return log_volume_min_of(mixture, data, alpha);
    case DenoiseMethod::none: break;
  }
  throw ValidationError("estimate_volume: no volume for denoise method none");
}

/// Modal EM from every data point, tight-cluster merging, then optional
/// denoising of low-density modes.
template <typename Scalar>
ModalClusterResult<Scalar> modal_cluster(const GaussianMixture<Scalar>& mixture, const Matrix<Scalar>& data,
                                         const ClusterConfig& config) {
  ModalClusterResult<Scalar> out;
  out.merge_tolerance = config.merge_tolerance ? static_cast<Scalar>(*config.merge_tolerance)
                                               : default_merge_tolerance(mixture);
  out.mem = run_mem(mixture, data, config.mem);
  out.modes = merge_tight_clusters(out.mem.converged_points, out.merge_tolerance);
  out.modes.mode_log_density = log_density(mixture, out.modes.modes);
  if (config.denoise == DenoiseMethod::none) {
    out.partition = partition_without_denoising(out.modes, mixture);
  } else {
    out.volume = estimate_volume(config.denoise, mixture, data, config.alpha);
    out.partition = denoise_modes(out.modes, mixture, *out.volume);
  }
  return out;
}

template <typename Scalar>
struct GridPartition {
  Vector<Scalar> xs;  // lattice coordinates along the first axis
  Vector<Scalar> ys;  // and along the second
  /// Lattice nodes, x varying fastest: node (ix, iy) is row iy * xs.size() + ix.
  Matrix<Scalar> nodes;
  LabelVector labels;
  ModalClusterResult<Scalar> result;
};

template <typename Scalar>
Vector<Scalar> lattice_axis(Scalar lo, Scalar hi, Index count) {
  if (count == 1) return Vector<Scalar>::Constant(1, lo);
  return Vector<Scalar>::LinSpaced(count, lo, hi);
}

template <typename Scalar>
void check_lattice(Index dim, const std::array<std::pair<Scalar, Scalar>, 2>& bounds,
                   const std::array<Index, 2>& resolution) {
  if (dim != 2) throw UnsupportedDimensionError("grid output requires a two-dimensional model");
  for (int a = 0; a < 2; ++a) {
    if (resolution[a] < 1) throw ValidationError("grid resolution must be at least 1 along each axis");
    if (!std::isfinite(static_cast<double>(bounds[a].first)) || !std::isfinite(static_cast<double>(bounds[a].second)) ||
        bounds[a].second < bounds[a].first) {
      throw ValidationError("grid bounds must be finite with lo <= hi");
    }
  }
}

template <typename Scalar>
Matrix<Scalar> lattice_nodes(const Vector<Scalar>& xs, const Vector<Scalar>& ys) {
  Matrix<Scalar> nodes(xs.size() * ys.size(), 2);
  for (Index iy = 0; iy < ys.size(); ++iy) {
    for (Index ix = 0; ix < xs.size(); ++ix) {
      nodes(iy * xs.size() + ix, 0) = xs(ix);
      nodes(iy * xs.size() + ix, 1) = ys(iy);
    }
  }
  return nodes;
}

/// Domains of attraction on a 2-D lattice: modal clustering with the lattice
/// nodes as starting points.
template <typename Scalar>
GridPartition<Scalar> attraction_partition_grid(const GaussianMixture<Scalar>& mixture,
                                                const std::array<std::pair<Scalar, Scalar>, 2>& bounds,
                                                const std::array<Index, 2>& resolution,
                                                const ClusterConfig& config) {
  check_lattice(mixture.dim(), bounds, resolution);
  GridPartition<Scalar> g;
  g.xs = lattice_axis(bounds[0].first, bounds[0].second, resolution[0]);
  g.ys = lattice_axis(bounds[1].first, bounds[1].second, resolution[1]);
  g.nodes = lattice_nodes(g.xs, g.ys);
  g.result = modal_cluster(mixture, g.nodes, config);
  g.labels = g.result.partition.labels;
  return g;
}

}  // namespace memgmm
