#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "memgmm/covariance.hpp"
#include "memgmm/mixture.hpp"
#include "memgmm/types.hpp"

namespace memgmm {

/// Maximum-likelihood EM fitting for the covariance models whose M-step is
/// closed form: EII, VII (spherical), EEI, VVI (diagonal), EEE, VVV (full).
struct FitConfig {
  std::vector<int> components{1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<ModelName> models{ModelName::EII, ModelName::VII, ModelName::EEI,
                                ModelName::VVI, ModelName::EEE, ModelName::VVV};
  double em_tolerance = 1e-8;
  int em_max_iter = 500;
  int restarts = 5;
  std::uint64_t seed = 42;

  void validate() const;
};

struct FitResult {
  GaussianMixtured mixture;
  double log_likelihood = 0.0;
  int n_parameters = 0;
  /// 2 log L - n_parameters log n; larger is better.
  double bic = 0.0;
  bool converged = false;
  int components = 0;
  ModelName model = ModelName::VVV;
  int iterations = 0;
  /// Log-likelihood after each E-step of the winning restart.
  std::vector<double> log_likelihood_trace;
};

struct ScoreRow {
  int components = 0;
  ModelName model = ModelName::VVV;
  int n_parameters = 0;
  std::optional<double> log_likelihood;
  std::optional<double> bic;
  bool converged = false;
  std::string failure;  // empty when the fit succeeded
};

struct SelectionResult {
  FitResult best;
  std::vector<ScoreRow> table;
};

bool is_fittable(ModelName model);

int n_parameters(ModelName model, int components, int dim);

double log_likelihood(const GaussianMixtured& mixture, const Matrix<double>& data);

FitResult em_fit(const Matrix<double>& data, int components, ModelName model, const FitConfig& config);

/// Fits every (G, model) pair and returns the largest BIC; ties go to fewer
/// parameters, then smaller G.
SelectionResult select_model(const Matrix<double>& data, const FitConfig& config);

}  // namespace memgmm
