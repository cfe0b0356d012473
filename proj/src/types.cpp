#include "mmm/types.hpp"

#include <cmath>
#include <sstream>

namespace mmm {

namespace {

std::vector<std::string> default_names(const std::string& prefix, Index count) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) out.push_back(prefix + std::to_string(i + 1));
  return out;
}

void check_block(const Matrix& block, const char* label, Index n) {
  if (block.cols() == 0) {
    throw Error(ErrorCode::EmptyBlock, std::string(label) + " has zero columns");
  }
  if (block.rows() != n) {
    std::ostringstream msg;
    msg << label << " has " << block.rows() << " rows, expected " << n;
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
  for (Index j = 0; j < block.cols(); ++j) {
    for (Index i = 0; i < block.rows(); ++i) {
      if (!std::isfinite(block(i, j))) {
        std::ostringstream msg;
        msg << label << " entry (" << i << ", " << j << ") is not finite";
        throw Error(ErrorCode::NonFiniteInput, msg.str());
      }
    }
  }
}

void check_names(std::vector<std::string>& names, const std::string& prefix, Index count,
                 const char* label) {
  if (names.empty()) {
    names = default_names(prefix, count);
  } else if (static_cast<Index>(names.size()) != count) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(label) + " column name count does not match column count");
  }
}

}  // namespace

bool all_finite(const Matrix& a) { return a.allFinite(); }

Dataset::Dataset(Matrix x, std::optional<Matrix> m, std::optional<Matrix> y, Matrix z,
                 ColumnNames names)
    : x_(std::move(x)), m_(std::move(m)), y_(std::move(y)), z_(std::move(z)),
      names_(std::move(names)) {
  const Index n = x_.rows();
  if (n < 1) throw Error(ErrorCode::EmptyBlock, "dataset has no rows");
  check_block(x_, "x", n);
  if (m_) check_block(*m_, "m", n);
  if (y_) check_block(*y_, "y", n);
  check_block(z_, "z", n);
  for (Index i = 0; i < n; ++i) {
    if (z_(i, 0) != 1.0) {
      throw Error(ErrorCode::InvalidArgument, "z column 0 must be the all-ones intercept");
    }
  }
  check_names(names_.x, "x", q(), "x");
  if (m_) check_names(names_.m, "m", p(), "m");
  else names_.m.clear();
  if (y_) check_names(names_.y, "y", outcomes(), "y");
  else names_.y.clear();
  if (names_.z.empty()) {
    names_.z = {"intercept"};
    for (Index j = 1; j < s(); ++j) names_.z.push_back("z" + std::to_string(j));
  } else if (static_cast<Index>(names_.z.size()) != s()) {
    throw Error(ErrorCode::DimensionMismatch, "z column name count does not match column count");
  }
}

const Matrix& Dataset::m() const {
  if (!m_) throw Error(ErrorCode::MissingBlock, "dataset has no mediator block");
  return *m_;
}

const Matrix& Dataset::y() const {
  if (!y_) throw Error(ErrorCode::MissingBlock, "dataset has no outcome block");
  return *y_;
}

Dataset Dataset::select_rows(const std::vector<Index>& rows) const {
  auto pick = [&rows](const Matrix& a) {
    Matrix out(static_cast<Index>(rows.size()), a.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i] < 0 || rows[i] >= a.rows()) {
        throw Error(ErrorCode::IndexOutOfRange, "row index out of range");
      }
      out.row(static_cast<Index>(i)) = a.row(rows[i]);
    }
    return out;
  };
  std::optional<Matrix> m;
  std::optional<Matrix> y;
  if (m_) m = pick(*m_);
  if (y_) y = pick(*y_);
  return Dataset(pick(x_), std::move(m), std::move(y), pick(z_), names_);
}

Dataset assemble_dataset(const Matrix& x, const std::optional<Matrix>& m,
                         const std::optional<Matrix>& y,
                         const std::optional<Matrix>& z_covariates, ColumnNames names) {
  const Index n = x.rows();
  if (x.cols() == 0) throw Error(ErrorCode::EmptyBlock, "x has zero columns");
  const Index extra = z_covariates ? z_covariates->cols() : 0;
  if (z_covariates && z_covariates->rows() != n) {
    throw Error(ErrorCode::DimensionMismatch, "z covariates row count differs from x");
  }
  Matrix z(n, 1 + extra);
  z.col(0).setOnes();
  if (extra > 0) z.rightCols(extra) = *z_covariates;
  if (!names.z.empty() && static_cast<Index>(names.z.size()) == extra) {
    names.z.insert(names.z.begin(), "intercept");
  }
  return Dataset(x, m, y, std::move(z), std::move(names));
}

void PenaltyConfig::validate() const {
  for (double v : {lambda_m1, lambda_m2, lambda_y1, lambda_y2}) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "penalties must be finite and non-negative");
    }
  }
}

bool FitDiagnostics::all_converged() const {
  for (const auto& c : mediator_stage)
    if (!c.converged) return false;
  for (const auto& c : outcome_stage)
    if (!c.converged) return false;
  return true;
}

void CoefficientSet::validate() const {
  const Index q_ = alpha.rows(), p_ = alpha.cols(), t_ = beta.cols(), s_ = zeta.rows();
  if (zeta.cols() != p_ || beta.rows() != p_ || gamma.rows() != q_ || gamma.cols() != t_ ||
      eta.rows() != s_ || eta.cols() != t_) {
    throw Error(ErrorCode::ShapeMismatch, "coefficient blocks have inconsistent shapes");
  }
  for (const Matrix* a : {&alpha, &zeta, &beta, &gamma, &eta}) {
    if (!a->allFinite()) throw Error(ErrorCode::NonFiniteInput, "coefficient entry not finite");
  }
}

ScalingRecord ScalingRecord::identity(Index q, Index p) {
  ScalingRecord rec;
  rec.x_mean = Vector::Zero(q);
  rec.x_scale = Vector::Ones(q);
  rec.m_mean = Vector::Zero(p);
  rec.m_scale = Vector::Ones(p);
  rec.applied = false;
  return rec;
}

namespace {

void scale_block(Matrix& block, Vector& mean, Vector& scale, const char* label) {
  const double root_n = std::sqrt(static_cast<double>(block.rows()));
  mean.resize(block.cols());
  scale.resize(block.cols());
  for (Index j = 0; j < block.cols(); ++j) {
    const double norm = block.col(j).norm();
    if (!(norm > 0.0)) {
      throw Error(ErrorCode::DegenerateColumn,
                  std::string(label) + " column " + std::to_string(j) + " has zero norm");
    }
    mean(j) = block.col(j).mean();
    scale(j) = root_n / norm;
    block.col(j) *= scale(j);
  }
}

}  // namespace

std::pair<Dataset, ScalingRecord> scale_columns(const Dataset& ds) {
  ScalingRecord rec;
  rec.applied = true;
  Matrix x = ds.x();
  scale_block(x, rec.x_mean, rec.x_scale, "x");
  std::optional<Matrix> m;
  if (ds.has_mediators()) {
    m = ds.m();
    scale_block(*m, rec.m_mean, rec.m_scale, "m");
  } else {
    rec.m_mean.resize(0);
    rec.m_scale.resize(0);
  }
  std::optional<Matrix> y;
  if (ds.has_outcomes()) y = ds.y();
  return {Dataset(std::move(x), std::move(m), std::move(y), ds.z(), ds.names()), std::move(rec)};
}

Dataset apply_scaling(const Dataset& ds, const ScalingRecord& rec) {
  if (rec.x_scale.size() != ds.q() || (ds.has_mediators() && rec.m_scale.size() != ds.p())) {
    throw Error(ErrorCode::ShapeMismatch, "scaling record does not match dataset shape");
  }
  Matrix x = ds.x() * rec.x_scale.asDiagonal();
  std::optional<Matrix> m;
  if (ds.has_mediators()) m = Matrix(ds.m() * rec.m_scale.asDiagonal());
  std::optional<Matrix> y;
  if (ds.has_outcomes()) y = ds.y();
  return Dataset(std::move(x), std::move(m), std::move(y), ds.z(), ds.names());
}

namespace {

CoefficientSet rescale(const CoefficientSet& coef, const ScalingRecord& rec, bool forward) {
  if (rec.x_scale.size() != coef.q() || rec.m_scale.size() != coef.p()) {
    throw Error(ErrorCode::ShapeMismatch, "scaling record does not match coefficient shape");
  }
  CoefficientSet out = coef;
  const Vector fx = forward ? Vector(rec.x_scale) : Vector(rec.x_scale.cwiseInverse());
  const Vector fm = forward ? Vector(rec.m_scale) : Vector(rec.m_scale.cwiseInverse());
  out.alpha = fx.asDiagonal() * coef.alpha;
  out.gamma = fx.asDiagonal() * coef.gamma;
  out.beta = fm.asDiagonal() * coef.beta;
  return out;
}

}  // namespace

CoefficientSet unscale_coefficients(const CoefficientSet& coef, const ScalingRecord& rec) {
  return rescale(coef, rec, true);
}

CoefficientSet scale_coefficients(const CoefficientSet& coef, const ScalingRecord& rec) {
  return rescale(coef, rec, false);
}

}  // namespace mmm
