#pragma once

// Test-only generators and oracles. Nothing here calls into the code paths
// it is used to check.

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "memgmm/mixture.hpp"
#include "memgmm/rng.hpp"
#include "memgmm/types.hpp"

namespace memgmm::testing {

using Mat = Matrix<double>;
using Vec = Vector<double>;

inline Mat random_orthogonal(Index d, Rng& rng) {
  Mat a(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(a);
  return qr.householderQ() * Mat::Identity(d, d);
}

/// SPD matrix with eigenvalues drawn log-uniformly from [lo, hi].
inline Mat random_spd(Index d, Rng& rng, double lo = 0.3, double hi = 3.0) {
  const Mat q = random_orthogonal(d, rng);
  Vec ev(d);
  for (Index j = 0; j < d; ++j) ev(j) = std::exp(rng.uniform(std::log(lo), std::log(hi)));
  Mat s = q * ev.asDiagonal() * q.transpose();
  return (s + s.transpose()) / 2.0;
}

inline GaussianMixtured random_mixture(Index G, Index d, Rng& rng, double mean_spread = 4.0) {
  Vec w(G);
  for (Index k = 0; k < G; ++k) w(k) = 0.2 + rng.uniform();
  w /= w.sum();
  Mat means(G, d);
  for (Index k = 0; k < G; ++k)
    for (Index j = 0; j < d; ++j) means(k, j) = rng.uniform(-mean_spread, mean_spread);
  std::vector<Mat> covs;
  for (Index k = 0; k < G; ++k) covs.push_back(random_spd(d, rng));
  return GaussianMixtured(w, means, covs);
}

inline Mat random_points(Index n, Index d, Rng& rng, double spread = 6.0) {
  Mat x(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) x(i, j) = rng.uniform(-spread, spread);
  return x;
}

/// Direct density evaluation without log-space tricks: sum_k pi_k phi_k(x)
/// using determinant() and inverse().
inline double naive_density(const GaussianMixtured& m, const Vec& x) {
  double f = 0.0;
  const double d = static_cast<double>(m.dim());
  for (Index k = 0; k < m.components(); ++k) {
    const Mat& s = m.covariance(k);
    const Vec diff = x - m.mean(k);
    const double q = diff.dot(s.inverse() * diff);
    f += m.weight(k) * std::exp(-0.5 * q) / std::sqrt(std::pow(2.0 * std::numbers::pi, d) * s.determinant());
  }
  return f;
}

/// Central finite-difference gradient of log f using naive_density.
inline Vec finite_difference_gradient(const GaussianMixtured& m, const Vec& x, double h = 1e-5) {
  Vec g(x.size());
  for (Index j = 0; j < x.size(); ++j) {
    Vec xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    g(j) = (std::log(naive_density(m, xp)) - std::log(naive_density(m, xm))) / (2.0 * h);
  }
  return g;
}

/// All-pairs connected components by repeated graph search, labels by first
/// appearance. O(n^2); independent of the union-find sweep.
inline LabelVector brute_components(const Mat& pts, double tol) {
  const Index n = pts.rows();
  LabelVector label(static_cast<size_t>(n), -1);
  Index next = 0;
  for (Index s = 0; s < n; ++s) {
    if (label[static_cast<size_t>(s)] >= 0) continue;
    std::vector<Index> stack{s};
    label[static_cast<size_t>(s)] = next;
    while (!stack.empty()) {
      const Index i = stack.back();
      stack.pop_back();
      for (Index j = 0; j < n; ++j) {
        if (label[static_cast<size_t>(j)] < 0 && (pts.row(i) - pts.row(j)).norm() <= tol) {
          label[static_cast<size_t>(j)] = next;
          stack.push_back(j);
        }
      }
    }
    ++next;
  }
  return label;
}

/// 1-D grid search for local maxima of a density sampled on [lo, hi].
template <typename F>
std::vector<double> grid_local_maxima(F&& f, double lo, double hi, double step) {
  std::vector<double> xs, fs;
  for (double x = lo; x <= hi + 1e-12; x += step) {
    xs.push_back(x);
    fs.push_back(f(x));
  }
  std::vector<double> out;
  for (size_t i = 1; i + 1 < xs.size(); ++i) {
    if (fs[i] > fs[i - 1] && fs[i] >= fs[i + 1]) out.push_back(xs[i]);
  }
  return out;
}

inline double adjusted_rand_index(const LabelVector& a, const LabelVector& b) {
  std::map<std::pair<Index, Index>, double> joint;
  std::map<Index, double> ra, rb;
  for (size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    ra[a[i]] += 1;
    rb[b[i]] += 1;
  }
  auto c2 = [](double x) { return x * (x - 1) / 2; };
  double index = 0, sa = 0, sb = 0;
  for (auto& [k, v] : joint) index += c2(v);
  for (auto& [k, v] : ra) sa += c2(v);
  for (auto& [k, v] : rb) sb += c2(v);
  const double total = c2(static_cast<double>(a.size()));
  const double expected = sa * sb / total;
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace memgmm::testing
