#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmm/error.hpp"

namespace mmm {

using Matrix = Eigen::MatrixXd;  // column-major
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct ColumnNames {
  std::vector<std::string> x;
  std::vector<std::string> m;
  std::vector<std::string> y;
  std::vector<std::string> z;  // z[0] is the intercept

  bool operator==(const ColumnNames&) const = default;
};

// Aligned exposure / mediator / outcome / covariate blocks for n subjects.
// Immutable once constructed; z always carries the intercept in column 0.
class Dataset {
 public:
  Dataset(Matrix x, std::optional<Matrix> m, std::optional<Matrix> y, Matrix z,
          ColumnNames names = {});

  const Matrix& x() const { return x_; }
  const Matrix& z() const { return z_; }
  bool has_mediators() const { return m_.has_value(); }
  bool has_outcomes() const { return y_.has_value(); }
  const Matrix& m() const;
  const Matrix& y() const;
  const ColumnNames& names() const { return names_; }

  Index n() const { return x_.rows(); }
  Index q() const { return x_.cols(); }
  Index p() const { return m_ ? m_->cols() : 0; }
  Index outcomes() const { return y_ ? y_->cols() : 0; }
  Index s() const { return z_.cols(); }

  /// Rows picked by index (repeats allowed), same column layout.
  Dataset select_rows(const std::vector<Index>& rows) const;

 private:
  Matrix x_;
  std::optional<Matrix> m_;
  std::optional<Matrix> y_;
  Matrix z_;
  ColumnNames names_;
};

/// Builds a Dataset, prepending the intercept column to the covariates.
Dataset assemble_dataset(const Matrix& x, const std::optional<Matrix>& m,
                         const std::optional<Matrix>& y,
                         const std::optional<Matrix>& z_covariates,
                         ColumnNames names = {});

struct PenaltyConfig {
  double lambda_m1 = 0.0;
  double lambda_m2 = 0.0;
  double lambda_y1 = 0.0;
  double lambda_y2 = 0.0;

  void validate() const;
  bool operator==(const PenaltyConfig&) const = default;
};

struct ColumnDiagnostics {
  int iterations = 0;
  double objective = 0.0;
  bool converged = false;
};

struct FitDiagnostics {
  std::vector<ColumnDiagnostics> mediator_stage;  // one per mediator column
  std::vector<ColumnDiagnostics> outcome_stage;   // one per outcome column

  bool all_converged() const;
};

// theta = (alpha, zeta, beta, gamma, eta) on the original data scale.
struct CoefficientSet {
  Matrix alpha;  // q x p
  Matrix zeta;   // s x p
  Matrix beta;   // p x T
  Matrix gamma;  // q x T
  Matrix eta;    // s x T
  FitDiagnostics diagnostics;
  ColumnNames names;

  Index q() const { return alpha.rows(); }
  Index p() const { return alpha.cols(); }
  Index outcomes() const { return beta.cols(); }
  Index s() const { return zeta.rows(); }

  /// Throws ShapeMismatch / NonFiniteInput if the five blocks disagree.
  void validate() const;
};

// Column normalization to l2-norm sqrt(n). Means are recorded but never
// subtracted; only the scale factors enter the model.
struct ScalingRecord {
  Vector x_mean;
  Vector x_scale;
  Vector m_mean;
  Vector m_scale;
  bool applied = false;

  static ScalingRecord identity(Index q, Index p);
};

std::pair<Dataset, ScalingRecord> scale_columns(const Dataset& ds);

/// Applies an existing record's factors to a dataset of matching shape.
Dataset apply_scaling(const Dataset& ds, const ScalingRecord& rec);

/// Maps coefficients fitted on scaled columns back to the original scale.
CoefficientSet unscale_coefficients(const CoefficientSet& coef, const ScalingRecord& rec);

/// Inverse of unscale_coefficients.
CoefficientSet scale_coefficients(const CoefficientSet& coef, const ScalingRecord& rec);

bool all_finite(const Matrix& a);

}  // namespace mmm
