#include "mmm/inference.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "mmm/parallel.hpp"
#include "mmm/random.hpp"

namespace mmm {

namespace {

constexpr double kSingularFloor = 1e-12;

std::vector<Index> nonzero_indices(const Vector& v) {
  std::vector<Index> out;
  for (Index i = 0; i < v.size(); ++i)
    if (v(i) != 0.0) out.push_back(i);
  return out;
}

std::vector<Index> complement(const std::vector<Index>& support, Index size) {
  std::vector<Index> out;
  std::size_t s = 0;
  for (Index i = 0; i < size; ++i) {
    if (s < support.size() && support[s] == i) {
      ++s;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

Matrix take_columns(const Matrix& a, const std::vector<Index>& cols) {
  Matrix out(a.rows(), static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Index>(c)) = a.col(cols[c]);
  return out;
}

Vector take(const Vector& v, const std::vector<Index>& idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Index>(i)) = v(idx[i]);
  return out;
}

double min_eigenvalue(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void check_index(Index v, Index bound, const char* label) {
  if (v < 0 || v >= bound) {
    throw Error(ErrorCode::IndexOutOfRange, std::string(label) + " index out of range");
  }
}

// Residualize `cols` on `others` (least squares); rank-deficient `others` is
// handled by the pivoted QR.
Matrix partial_out(const Matrix& cols, const Matrix& others) {
  if (others.cols() == 0) return cols;
  Eigen::ColPivHouseholderQR<Matrix> qr(others);
  return cols - others * qr.solve(cols);
}

struct Sandwich {
  double value;
  double rho;
  double c_min;
};

// sqrt(n) v' (I + l2 G^{-1}) (G/n)^{1/2} delta, with rho and C_min for the
// reference coefficients b.
Sandwich sandwich(const Matrix& support_cols, const Vector& delta, const Vector& b,
                  const Vector& v, double lambda2) {
  const double n = static_cast<double>(support_cols.rows());
  const Matrix gram = support_cols.transpose() * support_cols;
  const Matrix c11 = gram / n;
  const double lmin = min_eigenvalue(c11);
  if (!(lmin > kSingularFloor)) {
    throw Error(ErrorCode::SingularGram, "support Gram matrix is singular");
  }
  const Index d = gram.rows();
  const Eigen::LDLT<Matrix> gram_ldlt(gram);
  const Matrix factor = Matrix::Identity(d, d) + lambda2 * gram_ldlt.solve(Matrix::Identity(d, d));
  const Vector standardized = factor * (symmetric_sqrt(c11) * delta);

  Sandwich out;
  out.value = std::sqrt(n) * v.dot(standardized);
  const Matrix ridge = c11 + (lambda2 / n) * Matrix::Identity(d, d);
  const Vector shrunk = ridge.ldlt().solve(c11 * b);
  out.rho = shrunk.cwiseAbs().minCoeff();
  out.c_min = lmin + lambda2 / n;
  return out;
}

void check_direction(const Vector& v, Index d) {
  if (v.size() != d) {
    throw Error(ErrorCode::DimensionMismatch,
                "direction length " + std::to_string(v.size()) + " differs from support size " +
                    std::to_string(d));
  }
  if (std::abs(v.norm() - 1.0) > 1e-12) {
    throw Error(ErrorCode::UnnormalizedDirection, "direction vector must have unit norm");
  }
}

}  // namespace

double mse_bound_beta(const Dataset& ds, const Vector& beta_k, const PenaltyConfig& penalties) {
  penalties.validate();
  const Matrix& m = ds.m();
  if (beta_k.size() != ds.p()) throw Error(ErrorCode::DimensionMismatch, "beta_k must have length p");
  const double n = static_cast<double>(ds.n());
  const double p = static_cast<double>(ds.p());
  const Matrix second_moment = (m.transpose() * m) / n;
  const double delta = min_eigenvalue(second_moment);
  if (!(delta > kSingularFloor)) {
    throw Error(ErrorCode::SingularGram, "mediator second-moment matrix is singular");
  }
  const double m_inf = m.cwiseAbs().maxCoeff();
  const double l1 = penalties.lambda_y1, l2 = penalties.lambda_y2;
  const double numerator =
      4.0 * l2 * l2 * beta_k.squaredNorm() + 8.0 * n * p * m_inf * m_inf + l1 * l1 * p;
  const double denom = delta * n + l2;
  return numerator / (denom * denom);
}

std::optional<double> eic_value(const Matrix& gram, const Vector& coefficients, double lambda1,
                                double lambda2, Index n) {
  if (gram.rows() != gram.cols() || gram.rows() != coefficients.size()) {
    throw Error(ErrorCode::DimensionMismatch, "Gram and coefficient sizes differ");
  }
  const std::vector<Index> support = nonzero_indices(coefficients);
  if (support.empty()) throw Error(ErrorCode::EmptySupport, "inspected coefficient column is all zero");
  if (lambda1 == 0.0) return std::nullopt;
  const std::vector<Index> rest = complement(support, coefficients.size());
  if (rest.empty()) return 0.0;

  const Index d = static_cast<Index>(support.size());
  Matrix c11(d, d);
  Matrix c21(static_cast<Index>(rest.size()), d);
  for (Index a = 0; a < d; ++a) {
    for (Index b = 0; b < d; ++b) c11(a, b) = gram(support[a], support[b]);
    for (std::size_t r = 0; r < rest.size(); ++r) c21(static_cast<Index>(r), a) = gram(rest[r], support[a]);
  }
  const Matrix ridge = c11 + (lambda2 / static_cast<double>(n)) * Matrix::Identity(d, d);
  if (!(min_eigenvalue(ridge) > kSingularFloor)) {
    throw Error(ErrorCode::SingularGram, "support block of the Gram matrix is singular");
  }
  const Vector b1 = take(coefficients, support);
  const Vector signs = b1.unaryExpr([](double v) { return static_cast<double>((v > 0) - (v < 0)); });
  const Vector rhs = signs + (2.0 * lambda2 / lambda1) * b1;
  return (c21 * ridge.ldlt().solve(rhs)).cwiseAbs().maxCoeff();
}

EicReport check_eic(const Dataset& ds, const CoefficientSet& coef, const PenaltyConfig& penalties,
                    Index outcome, Index mediator) {
  penalties.validate();
  check_index(outcome, coef.outcomes(), "outcome");
  check_index(mediator, coef.p(), "mediator");
  const Matrix& m = ds.m();
  if (m.cols() != coef.p() || ds.q() != coef.q()) {
    throw Error(ErrorCode::ShapeMismatch, "coefficients do not match dataset");
  }
  const double n = static_cast<double>(ds.n());
  const Matrix c_m = (m.transpose() * m) / n;
  const Matrix c_x = (ds.x().transpose() * ds.x()) / n;

  EicReport rep;
  const Vector beta_k = coef.beta.col(outcome);
  const Vector alpha_l = coef.alpha.col(mediator);
  rep.support_beta = static_cast<Index>(nonzero_indices(beta_k).size());
  rep.support_alpha = static_cast<Index>(nonzero_indices(alpha_l).size());
  rep.value_beta = eic_value(c_m, beta_k, penalties.lambda_y1, penalties.lambda_y2, ds.n());
  rep.value_alpha = eic_value(c_x, alpha_l, penalties.lambda_m1, penalties.lambda_m2, ds.n());
  if (rep.value_beta || rep.value_alpha) {
    const double worst = std::max(rep.value_beta.value_or(0.0), rep.value_alpha.value_or(0.0));
    rep.psi_margin = 1.0 - worst;
  }
  return rep;
}

std::optional<double> NormalityStat::studentized() const {
  if (degenerate_variance) return std::nullopt;
  return value / std::sqrt(target_variance);
}

Matrix symmetric_sqrt(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  const Vector roots = es.eigenvalues().cwiseMax(kSingularFloor).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

NormalityStat standardized_beta_stat(const Dataset& ds, const CoefficientSet& reference,
                                     const CoefficientSet& estimate,
                                     const PenaltyConfig& penalties, Index outcome,
                                     const Vector& direction, const NormalityOptions& opts) {
  penalties.validate();
  check_index(outcome, reference.outcomes(), "outcome");
  if (estimate.beta.rows() != reference.beta.rows() || estimate.beta.cols() != reference.beta.cols() ||
      reference.p() != ds.p()) {
    throw Error(ErrorCode::ShapeMismatch, "beta shapes differ");
  }
  const Vector ref = reference.beta.col(outcome);
  const Vector est = estimate.beta.col(outcome);
  const std::vector<Index> support =
      nonzero_indices(opts.support == SupportSource::Reference ? ref : est);
  if (support.empty()) throw Error(ErrorCode::EmptySupport, "beta column has empty support");
  check_direction(direction, static_cast<Index>(support.size()));

  Matrix cols = take_columns(ds.m(), support);
  if (opts.gram == GramMode::Partialled) {
    const std::vector<Index> rest = complement(support, ds.p());
    Matrix others(ds.n(), static_cast<Index>(rest.size()) + ds.q() + ds.s());
    others << take_columns(ds.m(), rest), ds.x(), ds.z();
    cols = partial_out(cols, others);
  }
  const Sandwich sw =
      sandwich(cols, take(est, support) - take(ref, support), take(ref, support), direction,
               penalties.lambda_y2);

  NormalityStat out;
  out.value = sw.value;
  out.direction = direction;
  out.target_variance = 1.0;
  out.rho = sw.rho;
  out.c_min = sw.c_min;
  out.support = support;
  return out;
}

NormalityStat standardized_mediation_stat(const Dataset& ds, const CoefficientSet& reference,
                                          const CoefficientSet& estimate,
                                          const PenaltyConfig& penalties, Index outcome,
                                          const Vector& direction,
                                          const NormalityOptions& opts) {
  penalties.validate();
  check_index(outcome, reference.outcomes(), "outcome");
  if (estimate.alpha.rows() != reference.alpha.rows() ||
      estimate.alpha.cols() != reference.alpha.cols() || reference.q() != ds.q()) {
    throw Error(ErrorCode::ShapeMismatch, "alpha shapes differ");
  }
  // Exposure support: rows of alpha with any nonzero entry.
  const CoefficientSet& source = opts.support == SupportSource::Reference ? reference : estimate;
  const Vector row_mass = source.alpha.cwiseAbs().rowwise().sum();
  const std::vector<Index> support = nonzero_indices(row_mass);
  if (support.empty()) throw Error(ErrorCode::EmptySupport, "alpha has no nonzero rows");
  check_direction(direction, static_cast<Index>(support.size()));

  Matrix cols = take_columns(ds.x(), support);
  if (opts.gram == GramMode::Partialled) {
    const std::vector<Index> rest = complement(support, ds.q());
    Matrix others(ds.n(), static_cast<Index>(rest.size()) + ds.s());
    others << take_columns(ds.x(), rest), ds.z();
    cols = partial_out(cols, others);
  }
  const Vector ref = indirect_effect_matrix(reference).col(outcome);
  const Vector est = indirect_effect_matrix(estimate).col(outcome);
  const Sandwich sw = sandwich(cols, take(est, support) - take(ref, support), take(ref, support),
                               direction, penalties.lambda_y2);

  NormalityStat out;
  out.value = sw.value;
  out.direction = direction;
  out.target_variance = reference.beta.col(outcome).squaredNorm();
  out.degenerate_variance = out.target_variance == 0.0;
  out.rho = sw.rho;
  out.c_min = sw.c_min;
  out.support = support;
  return out;
}

BootstrapResult bootstrap_indirect(const Dataset& ds, const PenaltyConfig& penalties,
                                   const MmmFitOptions& opts, int replicates,
                                   std::uint64_t seed) {
  if (replicates < 2) throw Error(ErrorCode::InvalidArgument, "bootstrap needs at least 2 replicates");
  penalties.validate();
  MmmFitOptions inner = opts;
  inner.solver.threads = 1;

  const auto count = static_cast<std::size_t>(replicates);
  std::vector<std::optional<Matrix>> draws(count);
  parallel_for(count, opts.solver.threads, [&](std::size_t b) {
    const auto rows = resample_indices(ds.n(), derive_seed(seed, {b}));
    try {
      const CoefficientSet coef = fit_mmm(ds.select_rows(rows), penalties, inner);
      if (coef.diagnostics.all_converged()) draws[b] = indirect_effect_matrix(coef);
    } catch (const Error&) {
      // dropped and counted below
    }
  });

  BootstrapResult br;
  for (auto& d : draws) {
    if (d) br.replicates.push_back(std::move(*d));
  }
  br.replicate_count = static_cast<int>(br.replicates.size());
  br.failed_count = replicates - br.replicate_count;
  if (br.failed_count * 5 > replicates || br.replicate_count < 2) {
    throw Error(ErrorCode::TooManyFailures,
                std::to_string(br.failed_count) + " of " + std::to_string(replicates) +
                    " bootstrap replicates failed");
  }

  const Index q = br.replicates.front().rows(), t = br.replicates.front().cols();
  const double b = static_cast<double>(br.replicate_count);
  br.mean = Matrix::Zero(q, t);
  for (const auto& r : br.replicates) br.mean += r;
  br.mean /= b;
  br.sd = Matrix::Zero(q, t);
  br.sign_agreement = Matrix::Zero(q, t);
  for (const auto& r : br.replicates) {
    br.sd += (r - br.mean).cwiseAbs2();
    for (Index j = 0; j < q; ++j)
      for (Index l = 0; l < t; ++l) {
        const auto sr = (r(j, l) > 0) - (r(j, l) < 0);
        const auto sm = (br.mean(j, l) > 0) - (br.mean(j, l) < 0);
        if (sr == sm) br.sign_agreement(j, l) += 1.0;
      }
  }
  br.sd = (br.sd / (b - 1.0)).cwiseSqrt();
  br.sign_agreement /= b;
  return br;
}

double default_stability_threshold(const BootstrapResult& br) {
  double peak = 0.0;
  for (const auto& r : br.replicates) peak = std::max(peak, r.cwiseAbs().maxCoeff());
  return 1e-8 * peak;
}

double stability_index(const BootstrapResult& br, double threshold) {
  if (!std::isfinite(threshold) || threshold < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "threshold must be finite and >= 0");
  }
  if (br.replicates.empty()) throw Error(ErrorCode::InvalidArgument, "no bootstrap replicates");
  const Index q = br.replicates.front().rows(), t = br.replicates.front().cols();
  const double b = static_cast<double>(br.replicates.size());
  double total = 0.0;
  for (Index j = 0; j < q; ++j) {
    for (Index l = 0; l < t; ++l) {
      std::array<int, 3> counts{0, 0, 0};  // -1, 0, +1
      for (const auto& r : br.replicates) {
        const double v = r(j, l);
        const int cls = std::abs(v) <= threshold ? 0 : (v > 0 ? 1 : -1);
        ++counts[static_cast<std::size_t>(cls + 1)];
      }
      total += *std::max_element(counts.begin(), counts.end()) / b;
    }
  }
  return total / static_cast<double>(q * t);
}

std::optional<double> type1_rate(const Matrix& estimate, const Matrix& truth, double threshold) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "estimate and truth shapes differ");
  }
  Index nulls = 0, hits = 0;
  for (Index j = 0; j < truth.cols(); ++j)
    for (Index i = 0; i < truth.rows(); ++i) {
      if (truth(i, j) != 0.0) continue;
      ++nulls;
      if (std::abs(estimate(i, j)) > threshold) ++hits;
    }
  if (nulls == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(nulls);
}

LambdaScaling lambda_scaling(const PenaltyConfig& penalties, Index n) {
  const double nn = static_cast<double>(n), root = std::sqrt(nn);
  LambdaScaling out;
  out.n = nn;
  out.m1_over_sqrt_n = penalties.lambda_m1 / root;
  out.m2_over_n = penalties.lambda_m2 / nn;
  out.y1_over_sqrt_n = penalties.lambda_y1 / root;
  out.y2_over_n = penalties.lambda_y2 / nn;
  out.m2_over_sqrt_n = penalties.lambda_m2 / root;
  out.y2_over_sqrt_n = penalties.lambda_y2 / root;
  return out;
}

}  // namespace mmm
