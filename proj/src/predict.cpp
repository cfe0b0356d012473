#include "mmm/predict.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mmm {

namespace {

void check_inputs(const CoefficientSet& coef, const Matrix& x_new, const Matrix& z_new) {
  if (x_new.cols() != coef.q()) {
    throw Error(ErrorCode::DimensionMismatch, "x_new has " + std::to_string(x_new.cols()) +
                                                  " columns, model expects " +
                                                  std::to_string(coef.q()));
  }
  if (z_new.cols() != coef.s()) {
    throw Error(ErrorCode::DimensionMismatch, "z_new has " + std::to_string(z_new.cols()) +
                                                  " columns, model expects " +
                                                  std::to_string(coef.s()));
  }
  if (z_new.rows() != x_new.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "x_new and z_new row counts differ");
  }
  for (Index i = 0; i < z_new.rows(); ++i) {
    if (z_new(i, 0) != 1.0) {
      throw Error(ErrorCode::InvalidArgument, "z_new column 0 must be the intercept");
    }
  }
}

}  // namespace

Matrix predict_mediators(const CoefficientSet& coef, const Matrix& x_new, const Matrix& z_new) {
  check_inputs(coef, x_new, z_new);
  return x_new * coef.alpha + z_new * coef.zeta;
}

PredictionResult predict_outcomes(const CoefficientSet& coef, const Matrix& x_new,
                                  const Matrix& z_new) {
  PredictionResult out;
  out.predicted_mediators = predict_mediators(coef, x_new, z_new);
  out.predicted_outcomes =
      out.predicted_mediators * coef.beta + x_new * coef.gamma + z_new * coef.eta;
  out.mode = PredictionMode::Mediated;
  return out;
}

PredictionResult predict_outcomes_observed_m(const CoefficientSet& coef, const Matrix& m_new,
                                             const Matrix& x_new, const Matrix& z_new) {
  check_inputs(coef, x_new, z_new);
  if (m_new.cols() != coef.p() || m_new.rows() != x_new.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "m_new shape does not match the model");
  }
  PredictionResult out;
  out.predicted_mediators = m_new;
  out.predicted_outcomes = m_new * coef.beta + x_new * coef.gamma + z_new * coef.eta;
  out.mode = PredictionMode::ObservedMediator;
  return out;
}

PredictionResult predict_outcomes_direct(const CoefficientSet& coef, const Matrix& x_new,
                                         const Matrix& z_new) {
  check_inputs(coef, x_new, z_new);
  PredictionResult out;
  out.predicted_mediators = Matrix(x_new.rows(), 0);
  out.predicted_outcomes = x_new * coef.gamma + z_new * coef.eta;
  out.mode = PredictionMode::Direct;
  return out;
}

std::optional<double> pearson(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::ShapeMismatch, "correlation inputs differ in length");
  if (a.size() < 2) return std::nullopt;
  const Vector ca = a.array() - a.mean();
  const Vector cb = b.array() - b.mean();
  const double sa = ca.norm(), sb = cb.norm();
  if (sa == 0.0 || sb == 0.0) return std::nullopt;
  return std::clamp(ca.dot(cb) / (sa * sb), -1.0, 1.0);
}

std::vector<RegressionMetrics> evaluate_regression(const Matrix& predicted, const Matrix& truth) {
  if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "prediction and truth shapes differ");
  }
  if (truth.rows() < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 rows");
  std::vector<RegressionMetrics> out;
  for (Index l = 0; l < truth.cols(); ++l) {
    RegressionMetrics m;
    m.rmse = std::sqrt((predicted.col(l) - truth.col(l)).squaredNorm() /
                       static_cast<double>(truth.rows()));
    m.pearson = pearson(predicted.col(l), truth.col(l));
    out.push_back(m);
  }
  return out;
}

BinaryMetrics evaluate_binary(const Vector& scores, const Vector& labels, double cut) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::ShapeMismatch, "scores and labels differ in length");
  if (scores.size() == 0) throw Error(ErrorCode::InvalidArgument, "no observations");
  Index positives = 0, correct = 0;
  for (Index i = 0; i < labels.size(); ++i) {
    if (labels(i) != 0.0 && labels(i) != 1.0) {
      throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
    }
    positives += labels(i) == 1.0;
    const bool predicted = scores(i) >= cut;
    correct += predicted == (labels(i) == 1.0);
  }
  BinaryMetrics out;
  const Index n = labels.size();
  out.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  const Index negatives = n - positives;
  if (positives == 0 || negatives == 0) return out;

  // Mann-Whitney with mid-ranks for ties.
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return scores(a) < scores(b); });
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores(order[j + 1]) == scores(order[i])) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      if (labels(order[k]) == 1.0) positive_rank_sum += mid_rank;
    i = j + 1;
  }
  const double np = static_cast<double>(positives), nn = static_cast<double>(negatives);
  out.auc = (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
  return out;
}

}  // namespace mmm
