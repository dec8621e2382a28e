#include "memgmm/synth.hpp"

#include <cmath>

#include "memgmm/errors.hpp"

namespace memgmm::synth {

Vector<double> skew_normal(const Vector<double>& xi, const Matrix<double>& omega, const Vector<double>& alpha,
                           Rng& rng) {
  const Index d = xi.size();
  const Vector<double> scale = omega.diagonal().cwiseSqrt();
  const Matrix<double> corr = scale.cwiseInverse().asDiagonal() * omega * scale.cwiseInverse().asDiagonal();
  const double q = alpha.dot(corr * alpha);
  const Vector<double> delta = corr * alpha / std::sqrt(1.0 + q);

  Matrix<double> joint(d + 1, d + 1);
  joint(0, 0) = 1.0;
  joint.block(1, 0, d, 1) = delta;
  joint.block(0, 1, 1, d) = delta.transpose();
  joint.block(1, 1, d, d) = corr;
  Eigen::LLT<Matrix<double>> llt(joint);
  if (llt.info() != Eigen::Success) throw ValidationError("skew_normal: scale matrix is not positive definite");

  Vector<double> u(d + 1);
  for (Index j = 0; j <= d; ++j) u(j) = rng.normal();
  const Vector<double> w = llt.matrixL() * u;
  const Vector<double> z = w(0) > 0.0 ? Vector<double>(w.tail(d)) : Vector<double>(-w.tail(d));
  return xi + scale.cwiseProduct(z);
}

Sample motivating(Index n, std::uint64_t seed, const Vector<double>& slant) {
  if (n < 1) throw ValidationError("motivating: n must be at least 1");
  if (slant.size() != 2) throw ValidationError("motivating: slant must have two entries");
  Rng rng(seed);
  const Vector<double> mu1{{5.0, -2.0}};
  const Vector<double> xi2{{0.0, 0.0}};
  const Matrix<double> omega2{{1.0, 0.5}, {0.5, 1.0}};

  Sample s;
  s.data.resize(n, 2);
  s.labels.resize(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) {
    if (rng.uniform() < 1.0 / 3.0) {
      s.labels[static_cast<size_t>(i)] = 0;
      s.data(i, 0) = mu1(0) + rng.normal();
      s.data(i, 1) = mu1(1) + rng.normal();
    } else {
      s.labels[static_cast<size_t>(i)] = 1;
      s.data.row(i) = skew_normal(xi2, omega2, slant, rng).transpose();
    }
  }
  return s;
}

GaussianMixtured separated_gaussians_mixture(Index G, Index d, double separation) {
  if (G < 1 || d < 1) throw ValidationError("separated_gaussians: G and d must be at least 1");
  Matrix<double> means = Matrix<double>::Zero(G, d);
  for (Index k = 0; k < G; ++k) means(k, 0) = separation * static_cast<double>(k);
  std::vector<Matrix<double>> covs(static_cast<size_t>(G), Matrix<double>::Identity(d, d));
  return GaussianMixtured(Vector<double>::Constant(G, 1.0 / static_cast<double>(G)), means, covs, ModelName::EII);
}

Sample sample_mixture(const GaussianMixtured& mixture, Index n, Rng& rng) {
  const Index G = mixture.components();
  const Index d = mixture.dim();
  Sample s;
  s.data.resize(n, d);
  s.labels.resize(static_cast<size_t>(n));
  Vector<double> z(d);
  for (Index i = 0; i < n; ++i) {
    const double u = rng.uniform();
    double acc = 0.0;
    Index k = G - 1;
    for (Index c = 0; c < G; ++c) {
      acc += mixture.weight(c);
      if (u < acc) {
        k = c;
        break;
      }
    }
    for (Index j = 0; j < d; ++j) z(j) = rng.normal();
    s.data.row(i) = (mixture.mean(k) + mixture.cholesky_factor(k) * z).transpose();
    s.labels[static_cast<size_t>(i)] = k;
  }
  return s;
}

Sample separated_gaussians(Index n, Index G, Index d, double separation, std::uint64_t seed) {
  if (n < 1) throw ValidationError("separated_gaussians: n must be at least 1");
  Rng rng(seed);
  return sample_mixture(separated_gaussians_mixture(G, d, separation), n, rng);
}

}  // namespace memgmm::synth
