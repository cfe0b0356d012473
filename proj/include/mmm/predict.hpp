#pragma once

#include <optional>
#include <vector>

#include "mmm/types.hpp"

namespace mmm {

enum class PredictionMode { Mediated, ObservedMediator, Direct };

struct PredictionResult {
  Matrix predicted_mediators;  // N x p (observed mediators in ObservedMediator mode)
  Matrix predicted_outcomes;   // N x T
  PredictionMode mode = PredictionMode::Mediated;
};

/// m_hat = x_new alpha + z_new zeta
Matrix predict_mediators(const CoefficientSet& coef, const Matrix& x_new, const Matrix& z_new);

/// y_hat = m_hat beta + x_new gamma + z_new eta, m_hat from predict_mediators.
/// Takes no mediator argument: only exposures and covariates are needed.
PredictionResult predict_outcomes(const CoefficientSet& coef, const Matrix& x_new,
                                  const Matrix& z_new);

/// Baseline that plugs observed mediators into the outcome equation.
PredictionResult predict_outcomes_observed_m(const CoefficientSet& coef, const Matrix& m_new,
                                             const Matrix& x_new, const Matrix& z_new);

/// Direct-effect-only baseline x_new gamma + z_new eta.
PredictionResult predict_outcomes_direct(const CoefficientSet& coef, const Matrix& x_new,
                                         const Matrix& z_new);

struct RegressionMetrics {
  double rmse = 0.0;
  std::optional<double> pearson;  // empty when either column is constant
};

std::vector<RegressionMetrics> evaluate_regression(const Matrix& predicted, const Matrix& truth);

struct BinaryMetrics {
  double accuracy = 0.0;
  std::optional<double> auc;  // empty when only one class is present
};

/// Label 1 is predicted when score >= cut. AUC counts tied pairs as 1/2.
BinaryMetrics evaluate_binary(const Vector& scores, const Vector& labels, double cut = 0.5);

/// Pearson correlation; empty if either input is constant.
std::optional<double> pearson(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

}  // namespace mmm
