#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "memgmm/errors.hpp"
#include "memgmm/mixture.hpp"
#include "memgmm/parallel.hpp"
#include "memgmm/types.hpp"

namespace memgmm {

/// How the M-step is evaluated. Both give the same iterates to rounding;
/// per_point is the straightforward loop kept as a reference and baseline.
enum class MStepKind { batched, per_point };

struct MemConfig {
  double tolerance = 1e-5;
  int max_iterations = 1000;
  bool damping_enabled = true;
  double damping_rate = 0.1;
  bool record_paths = false;
  /// Worker count for row-parallel kernels; 0 uses every available core.
  int threads = 1;
  MStepKind m_step = MStepKind::batched;

  void validate() const {
    if (!(tolerance > 0.0)) throw ValidationError("mem config: tolerance must be positive");
    if (!(damping_rate > 0.0)) throw ValidationError("mem config: damping rate must be positive");
    if (max_iterations < 1) throw ValidationError("mem config: max_iterations must be at least 1");
    if (threads < 0) throw ValidationError("mem config: threads must be non-negative");
  }
};

template <typename Scalar>
struct MemResult {
  /// n x d positions at termination (the modes each start climbed to).
  Matrix<Scalar> converged_points;
  /// Global iteration count at termination.
  int iterations = 0;
  /// Iteration at which each point was frozen, -1 if it never converged.
  std::vector<int> converged_at;
  /// Recorded only on request: paths[0] holds the starting points and
  /// paths[t] the positions after iteration t.
  std::vector<Matrix<Scalar>> paths;
  Vector<Scalar> final_log_density;
  bool converged = true;
  std::vector<Index> unconverged;
};

/// Step-size schedule 1 - exp(-rate * t).
inline double damping_weight(int t, double rate) {
  return -std::expm1(-rate * static_cast<double>(t));
}

/// Closed-form maximizer of sum_k z_k log phi(x; mu_k, Sigma_k) for a single
/// posterior row, solved with a Cholesky factorization of the accumulated
/// precision sum_k z_k Sigma_k^{-1}.
template <typename Scalar>
Vector<Scalar> m_step_reference(const GaussianMixture<Scalar>& mixture, const Vector<Scalar>& z) {
  const Index d = mixture.dim();
  if (z.size() != mixture.components()) throw ValidationError("m_step_reference: z has wrong length");
  Matrix<Scalar> a = Matrix<Scalar>::Zero(d, d);
  Vector<Scalar> b = Vector<Scalar>::Zero(d);
  for (Index k = 0; k < mixture.components(); ++k) {
    a += z(k) * mixture.precision(k);
    b += z(k) * (mixture.precision(k) * mixture.mean(k));
  }
  Eigen::LLT<Matrix<Scalar>> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("m_step_reference: accumulated precision is not positive definite");
  }
  return llt.solve(b);
}

namespace detail {

/// Batched M-step over one row block. The packed lower triangles of
/// A_i = sum_k z_ik P_k and the vectors b_i = sum_k z_ik P_k mu_k are
/// accumulated one component at a time as column-scaled additions, then every
/// d x d system is Cholesky-factored and solved with the rows laid out as
/// structure-of-arrays.
template <typename Scalar, typename ZBlock, typename OutBlock>
void m_step_batched_block(const GaussianMixture<Scalar>& mixture, const ZBlock& z, OutBlock&& out,
                          Index first_row) {
  const Index rows = z.rows();
  const Index d = mixture.dim();
  const Matrix<Scalar>& packed = mixture.packed_precisions();
  const Matrix<Scalar>& pm = mixture.precision_means();

  Matrix<Scalar> a = Matrix<Scalar>::Zero(rows, packed_size(d));
  out.setZero();
  for (Index k = 0; k < mixture.components(); ++k) {
    const auto zk = z.col(k).array();
    for (Index t = 0; t < a.cols(); ++t) a.col(t).array() += zk * packed(k, t);
    for (Index j = 0; j < d; ++j) out.col(j).array() += zk * pm(k, j);
  }

  for (Index j = 0; j < d; ++j) {
    auto ajj = a.col(packed_index(j, j)).array();
    for (Index l = 0; l < j; ++l) ajj -= a.col(packed_index(j, l)).array().square();
    if (!(ajj > Scalar(0)).all()) {
      Index bad = 0;
      while (ajj(bad) > Scalar(0)) ++bad;
      throw NumericalError("m_step_batched: accumulated precision is not positive definite at row " +
                           std::to_string(first_row + bad));
    }
    ajj = ajj.sqrt();
    for (Index i = j + 1; i < d; ++i) {
      auto aij = a.col(packed_index(i, j)).array();
      for (Index l = 0; l < j; ++l) aij -= a.col(packed_index(i, l)).array() * a.col(packed_index(j, l)).array();
      aij /= ajj;
    }
  }

  for (Index j = 0; j < d; ++j) {
    auto bj = out.col(j).array();
    for (Index l = 0; l < j; ++l) bj -= a.col(packed_index(j, l)).array() * out.col(l).array();
    bj /= a.col(packed_index(j, j)).array();
  }
  for (Index j = d - 1; j >= 0; --j) {
    auto bj = out.col(j).array();
    for (Index l = j + 1; l < d; ++l) bj -= a.col(packed_index(l, j)).array() * out.col(l).array();
    bj /= a.col(packed_index(j, j)).array();
  }
}

/// Per-point E-step in the plain style: one triangular solve per component.
template <typename Scalar>
Vector<Scalar> point_posteriors(const GaussianMixture<Scalar>& mixture, const Vector<Scalar>& x) {
  const Index G = mixture.components();
  Vector<Scalar> terms(G);
  for (Index k = 0; k < G; ++k) {
    const Vector<Scalar> diff = x - mixture.mean(k);
    const Vector<Scalar> y = mixture.cholesky_factor(k).template triangularView<Eigen::Lower>().solve(diff);
    terms(k) = mixture.log_normalizers()(k) - Scalar(0.5) * y.squaredNorm();
  }
  const Scalar top = terms.maxCoeff();
  if (!std::isfinite(static_cast<double>(top))) throw NumericalError("log-density of point is not finite");
  Vector<Scalar> z = (terms.array() - top).exp().matrix();
  return z / z.sum();
}

}  // namespace detail

/// M-step for every row of Z at once; row i of the result equals
/// m_step_reference(mixture, Z.row(i)) up to rounding.
template <typename Scalar>
Matrix<Scalar> m_step_batched(const GaussianMixture<Scalar>& mixture, const Responsibilities<Scalar>& z,
                              int threads = 1) {
  if (z.cols() != mixture.components()) throw ValidationError("m_step_batched: Z must have G columns");
  Matrix<Scalar> out(z.rows(), mixture.dim());
  detail::for_each_row_block(z.rows(), threads, [&](Index begin, Index size) {
    detail::m_step_batched_block(mixture, z.middleRows(begin, size), out.middleRows(begin, size), begin);
  });
  return out;
}

/// grad log f(x) = sum_k z_k(x) Sigma_k^{-1} (mu_k - x).
template <typename Scalar>
Vector<Scalar> log_density_gradient(const GaussianMixture<Scalar>& mixture, const Vector<Scalar>& x) {
  if (x.size() != mixture.dim()) throw ValidationError("log_density_gradient: dimension mismatch");
  const Vector<Scalar> z = detail::point_posteriors(mixture, x);
  Vector<Scalar> g = Vector<Scalar>::Zero(x.size());
  for (Index k = 0; k < mixture.components(); ++k) g += z(k) * (mixture.precision(k) * (mixture.mean(k) - x));
  return g;
}

/// One damped MEM update of every row of `previous` at global iteration t.
template <typename Scalar>
Matrix<Scalar> mem_step(const GaussianMixture<Scalar>& mixture, const Matrix<Scalar>& previous, int t,
                        const MemConfig& config) {
  if (t < 1) throw ValidationError("mem_step: iteration index must be at least 1");
  detail::check_points(mixture, previous);
  const Index n = previous.rows();
  const Index G = mixture.components();
  Matrix<Scalar> proposal(n, mixture.dim());

  if (config.m_step == MStepKind::batched) {
    detail::for_each_row_block(n, config.threads, [&](Index begin, Index size) {
      Matrix<Scalar> z(size, G);
      detail::posteriors_block(mixture, previous.middleRows(begin, size), z, begin);
      detail::m_step_batched_block(mixture, z, proposal.middleRows(begin, size), begin);
    });
  } else {
    detail::for_each_row_block(n, config.threads, [&](Index begin, Index size) {
      for (Index i = begin; i < begin + size; ++i) {
        const Vector<Scalar> x = previous.row(i).transpose();
        proposal.row(i) = m_step_reference(mixture, detail::point_posteriors(mixture, x)).transpose();
      }
    });
  }

  if (!config.damping_enabled) return proposal;
  const Scalar omega = static_cast<Scalar>(damping_weight(t, config.damping_rate));
  return (Scalar(1) - omega) * previous + omega * proposal;
}

/// Runs Modal EM from every row of `start` simultaneously. A point is frozen
/// once max_j |x_j(t) - x_j(t-1)| / (1 + |x_j(t-1)|) < tolerance; the loop
/// stops when all points are frozen or max_iterations is reached, in which
/// case the result is flagged as not converged.
template <typename Scalar>
MemResult<Scalar> run_mem(const GaussianMixture<Scalar>& mixture, const Matrix<Scalar>& start,
                          const MemConfig& config) {
  config.validate();
  detail::check_points(mixture, start);
  if (!start.allFinite()) throw ValidationError("run_mem: starting points must be finite");

  const Index n = start.rows();
  const Index d = start.cols();
  MemResult<Scalar> result;
  result.converged_points = start;
  result.converged_at.assign(static_cast<size_t>(n), -1);
  if (config.record_paths) result.paths.push_back(start);

  std::vector<Index> active(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) active[static_cast<size_t>(i)] = i;

  Matrix<Scalar>& x = result.converged_points;
  for (int t = 1; t <= config.max_iterations && !active.empty(); ++t) {
    const Index m = static_cast<Index>(active.size());
    Matrix<Scalar> previous(m, d);
    for (Index a = 0; a < m; ++a) previous.row(a) = x.row(active[static_cast<size_t>(a)]);

    const Matrix<Scalar> next = mem_step(mixture, previous, t, config);

    std::vector<Index> still_active;
    still_active.reserve(active.size());
    for (Index a = 0; a < m; ++a) {
      const Index i = active[static_cast<size_t>(a)];
      const Scalar change =
          ((next.row(a) - previous.row(a)).array().abs() / (Scalar(1) + previous.row(a).array().abs())).maxCoeff();
      x.row(i) = next.row(a);
      if (change < Scalar(config.tolerance)) {
        result.converged_at[static_cast<size_t>(i)] = t;
      } else {
        still_active.push_back(i);
      }
    }
    active.swap(still_active);
    result.iterations = t;
    if (config.record_paths) result.paths.push_back(x);
  }

  result.converged = active.empty();
  result.unconverged = std::move(active);
  result.final_log_density = log_density(mixture, x, config.threads);
  return result;
}

}  // namespace memgmm
