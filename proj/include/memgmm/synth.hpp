#pragma once

#include <cstdint>
#include <vector>

#include "memgmm/mixture.hpp"
#include "memgmm/rng.hpp"
#include "memgmm/types.hpp"

namespace memgmm::synth {

struct Sample {
  Matrix<double> data;
  /// Zero-based generating component per row.
  LabelVector labels;
};

/// Skew-normal with location xi, scale matrix omega and slant alpha, drawn by
/// hidden truncation: (u0, u) ~ N(0, [[1, delta^T], [delta, corr(omega)]]),
/// z = u if u0 > 0 else -u, result xi + diag(omega)^{1/2} z.
Vector<double> skew_normal(const Vector<double>& xi, const Matrix<double>& omega, const Vector<double>& alpha,
                           Rng& rng);

/// Two-component bivariate mixture: weight 1/3 on N([5,-2], I) and 2/3 on a
/// skew-normal with location [0,0], scale [[1,0.5],[0.5,1]] and the given
/// slant (default [5,1]). Labels: 0 Gaussian, 1 skew-normal.
Sample motivating(Index n, std::uint64_t seed, const Vector<double>& slant = Vector<double>{{5.0, 1.0}});

/// G unit-covariance Gaussians with equal weights, component k centred at
/// k * separation along the first axis.
GaussianMixtured separated_gaussians_mixture(Index components, Index dim, double separation);

/// Draws n points from any Gaussian mixture.
Sample sample_mixture(const GaussianMixtured& mixture, Index n, Rng& rng);

Sample separated_gaussians(Index n, Index components, Index dim, double separation, std::uint64_t seed);

}  // namespace memgmm::synth
