#include "memgmm/gmm_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "memgmm/errors.hpp"
#include "memgmm/rng.hpp"

namespace memgmm {
namespace {

using Mat = Matrix<double>;
using Vec = Vector<double>;

class FitFailure : public Error {
 public:
  using Error::Error;
};

Mat floor_eigenvalues(const Mat& s, double floor) {
  Eigen::SelfAdjointEigenSolver<Mat> es(s);
  if (es.info() != Eigen::Success) throw FitFailure("eigensolver failed on a covariance estimate");
  if (es.eigenvalues().minCoeff() >= floor) return s;
  const Vec clamped = es.eigenvalues().cwiseMax(floor);
  Mat out = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
  return (out + out.transpose()) / 2.0;
}

GaussianMixtured m_step(const Mat& x, const Mat& z, ModelName model, double floor) {
  const Index n = x.rows();
  const Index d = x.cols();
  const Index G = z.cols();
  const Vec nk = z.colwise().sum().transpose();
  for (Index k = 0; k < G; ++k) {
    if (!(nk(k) >= static_cast<double>(d + 1))) {
      throw FitFailure("component " + std::to_string(k) + " has fewer than d+1 effective points");
    }
  }
  Vec weights = nk / static_cast<double>(n);
  weights /= weights.sum();
  Mat means(G, d);
  std::vector<Mat> scatter(static_cast<size_t>(G));
  for (Index k = 0; k < G; ++k) {
    means.row(k) = (z.col(k).transpose() * x) / nk(k);
    const Mat centered = x.rowwise() - means.row(k);
    scatter[static_cast<size_t>(k)] = centered.transpose() * z.col(k).asDiagonal() * centered;
  }

  std::vector<Mat> covs(static_cast<size_t>(G));
  const Mat eye = Mat::Identity(d, d);
  switch (model) {
    case ModelName::EII: {
      double total = 0.0;
      for (const Mat& w : scatter) total += w.trace();
      const double s = std::max(total / static_cast<double>(n * d), floor);
      for (auto& c : covs) c = s * eye;
      break;
    }
    case ModelName::VII:
      for (Index k = 0; k < G; ++k) {
        const double s = std::max(scatter[static_cast<size_t>(k)].trace() / (nk(k) * static_cast<double>(d)), floor);
        covs[static_cast<size_t>(k)] = s * eye;
      }
      break;
    case ModelName::EEI: {
      Vec diag = Vec::Zero(d);
      for (const Mat& w : scatter) diag += w.diagonal();
      diag = (diag / static_cast<double>(n)).cwiseMax(floor);
      for (auto& c : covs) c = diag.asDiagonal();
      break;
    }
    case ModelName::VVI:
      for (Index k = 0; k < G; ++k) {
        const Vec diag = (scatter[static_cast<size_t>(k)].diagonal() / nk(k)).cwiseMax(floor);
        covs[static_cast<size_t>(k)] = diag.asDiagonal();
      }
      break;
    case ModelName::EEE: {
      Mat pooled = Mat::Zero(d, d);
      for (const Mat& w : scatter) pooled += w;
      pooled = floor_eigenvalues((pooled + pooled.transpose()) / (2.0 * static_cast<double>(n)), floor);
      for (auto& c : covs) c = pooled;
      break;
    }
    case ModelName::VVV:
      for (Index k = 0; k < G; ++k) {
        const Mat& w = scatter[static_cast<size_t>(k)];
        covs[static_cast<size_t>(k)] = floor_eigenvalues((w + w.transpose()) / (2.0 * nk(k)), floor);
      }
      break;
    default:
      throw ValidationError("model " + std::string(to_string(model)) + " is not supported by the fitter");
  }
  try {
    return GaussianMixtured(std::move(weights), std::move(means), std::move(covs), model);
  } catch (const ValidationError& e) {
    throw FitFailure(std::string("M-step produced an invalid mixture: ") + e.what());
  }
}

/// k-means++ seeding followed by a few Lloyd iterations; returns hard labels.
LabelVector kmeans_labels(const Mat& x, int G, Rng& rng) {
  const Index n = x.rows();
  Mat centers(G, x.cols());
  centers.row(0) = x.row(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
  Vec dist2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < G; ++c) {
    const double total = dist2.sum();
    Index pick = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        acc += dist2(i);
        if (acc > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centers.row(c) = x.row(pick);
    dist2 = dist2.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  LabelVector labels(static_cast<size_t>(n), 0);
  for (int iter = 0; iter < 10; ++iter) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      Index best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Index k = 0; k < G; ++k) {
        const double dd = (x.row(i) - centers.row(k)).squaredNorm();
        if (dd < best_d) {
          best_d = dd;
          best = k;
        }
      }
      if (labels[static_cast<size_t>(i)] != best) changed = true;
      labels[static_cast<size_t>(i)] = best;
    }
    Mat sums = Mat::Zero(G, x.cols());
    Vec counts = Vec::Zero(G);
    for (Index i = 0; i < n; ++i) {
      sums.row(labels[static_cast<size_t>(i)]) += x.row(i);
      counts(labels[static_cast<size_t>(i)]) += 1.0;
    }
    for (Index k = 0; k < G; ++k) {
      if (counts(k) > 0) centers.row(k) = sums.row(k) / counts(k);
    }
    if (!changed && iter > 0) break;
  }
  return labels;
}

FitResult run_em(const Mat& x, int G, ModelName model, const FitConfig& config, Rng& rng, double floor) {
  const Index n = x.rows();
  const LabelVector init = kmeans_labels(x, G, rng);
  Mat z = Mat::Zero(n, G);
  for (Index i = 0; i < n; ++i) z(i, init[static_cast<size_t>(i)]) = 1.0;

  GaussianMixtured mixture = m_step(x, z, model, floor);
  std::vector<double> trace;
  double prev = -std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
  for (int it = 1; it <= config.em_max_iter; ++it) {
    iterations = it;
    Mat terms = component_log_terms(mixture, x);
    const Array<double> lse = detail::row_log_sum_exp<double>(terms, 0);
    const double ll = lse.sum();
    trace.push_back(ll);
    if (std::abs(ll - prev) <= config.em_tolerance * std::abs(ll)) {
      converged = true;
      break;
    }
    prev = ll;
    for (Index k = 0; k < G; ++k) terms.col(k).array() = (terms.col(k).array() - lse).exp();
    if (it == config.em_max_iter) break;
    mixture = m_step(x, terms, model, floor);
  }

  const int k_params = n_parameters(model, G, static_cast<int>(x.cols()));
  const double ll = trace.back();
  return FitResult{std::move(mixture), ll, k_params,
                   2.0 * ll - k_params * std::log(static_cast<double>(n)), converged, G, model, iterations,
                   std::move(trace)};
}

}  // namespace

void FitConfig::validate() const {
  if (components.empty()) throw ValidationError("fit config: component range is empty");
  for (int g : components) {
    if (g < 1) throw ValidationError("fit config: component counts must be at least 1");
  }
  if (models.empty()) throw ValidationError("fit config: model list is empty");
  for (ModelName m : models) {
    if (!is_fittable(m)) {
      throw ValidationError("fit config: model " + std::string(to_string(m)) + " is not supported by the fitter");
    }
  }
  if (!(em_tolerance > 0.0)) throw ValidationError("fit config: em tolerance must be positive");
  if (em_max_iter < 1) throw ValidationError("fit config: em_max_iter must be at least 1");
  if (restarts < 1) throw ValidationError("fit config: restarts must be at least 1");
}

bool is_fittable(ModelName model) {
  switch (model) {
    case ModelName::EII:
    case ModelName::VII:
    case ModelName::EEI:
    case ModelName::VVI:
    case ModelName::EEE:
    case ModelName::VVV: return true;
    default: return false;
  }
}

int n_parameters(ModelName model, int G, int d) {
  int cov = 0;
  switch (model) {
    case ModelName::EII: cov = 1; break;
    case ModelName::VII: cov = G; break;
    case ModelName::EEI: cov = d; break;
    case ModelName::VVI: cov = G * d; break;
    case ModelName::EEE: cov = d * (d + 1) / 2; break;
    case ModelName::VVV: cov = G * d * (d + 1) / 2; break;
    default:
      throw ValidationError("n_parameters: model " + std::string(to_string(model)) + " is not supported");
  }
  return (G - 1) + G * d + cov;
}

double log_likelihood(const GaussianMixtured& mixture, const Matrix<double>& data) {
  return log_density(mixture, data).sum();
}

FitResult em_fit(const Matrix<double>& data, int G, ModelName model, const FitConfig& config) {
  config.validate();
  if (!is_fittable(model)) {
    throw ValidationError("em_fit: model " + std::string(to_string(model)) + " is not supported");
  }
  const Index n = data.rows();
  const Index d = data.cols();
  if (G < 1) throw ValidationError("em_fit: G must be at least 1");
  if (d < 1 || n <= static_cast<Index>(G) * d) throw ValidationError("em_fit: need more than G*d observations");
  if (!data.allFinite()) throw ValidationError("em_fit: data contains non-finite values");

  const Mat centered = data.rowwise() - data.colwise().mean();
  const double floor = 1e-8 * (centered.array().square().sum() / static_cast<double>(n)) / static_cast<double>(d);

  std::optional<FitResult> best;
  std::string last_failure;
  for (int r = 0; r < config.restarts; ++r) {
    Rng rng(mix_seed(config.seed ^ mix_seed(static_cast<std::uint64_t>(r))));
    try {
      FitResult fit = run_em(data, G, model, config, rng, floor);
      if (!best || fit.log_likelihood > best->log_likelihood) best = std::move(fit);
    } catch (const FitFailure& e) {
      last_failure = e.what();
    } catch (const NumericalError& e) {
      last_failure = e.what();
    }
  }
  if (!best) throw FitError("all restarts failed for G=" + std::to_string(G) + " " + std::string(to_string(model)) +
                            ": " + last_failure);
  return std::move(*best);
}

SelectionResult select_model(const Matrix<double>& data, const FitConfig& config) {
  config.validate();
  std::optional<FitResult> best;
  std::vector<ScoreRow> table;
  const int d = static_cast<int>(data.cols());
  for (int G : config.components) {
    for (ModelName model : config.models) {
      ScoreRow row;
      row.components = G;
      row.model = model;
      row.n_parameters = n_parameters(model, G, d);
      try {
        FitResult fit = em_fit(data, G, model, config);
        row.log_likelihood = fit.log_likelihood;
        row.bic = fit.bic;
        row.converged = fit.converged;
        const bool better = !best || fit.bic > best->bic ||
                            (fit.bic == best->bic && (fit.n_parameters < best->n_parameters ||
                                                      (fit.n_parameters == best->n_parameters &&
                                                       fit.components < best->components)));
        if (better) best = std::move(fit);
      } catch (const FitError& e) {
        row.failure = e.what();
      } catch (const ValidationError& e) {
        row.failure = e.what();
      }
      table.push_back(std::move(row));
    }
  }
  if (!best) throw FitError("every (G, model) fit failed");
  return SelectionResult{std::move(*best), std::move(table)};
}

}  // namespace memgmm
