#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mmm/estimator.hpp"
#include "mmm/types.hpp"

namespace mmm {

/// Upper bound on E||beta_hat_k - beta_k||^2:
///   (4 l2^2 ||beta_k||^2 + 8 n p ||m||_inf^2 + l1^2 p) / (delta n + l2)^2
/// with delta the smallest eigenvalue of m'm / n. Throws SingularGram when
/// delta <= 1e-12.
double mse_bound_beta(const Dataset& ds, const Vector& beta_k, const PenaltyConfig& penalties);

struct EicReport {
  std::optional<double> value_beta;   // empty when lambda_y1 == 0
  std::optional<double> value_alpha;  // empty when lambda_m1 == 0
  std::optional<double> psi_margin;   // 1 - max(values present)
  Index support_beta = 0;
  Index support_alpha = 0;

  bool satisfied() const { return psi_margin && *psi_margin > 0.0; }
};

/// ||C21 (C11 + l2/n I)^{-1} (sign(b1) + 2 l2/l1 b1)||_inf for the support of
/// `coefficients` in the normalized Gram `gram` (= design'design / n).
/// Empty when lambda1 == 0; 0 when the support covers every column.
std::optional<double> eic_value(const Matrix& gram, const Vector& coefficients, double lambda1,
                                double lambda2, Index n);

/// Elastic irrepresentable condition for outcome column k (mediator Gram) and
/// mediator column l (exposure Gram), supports taken from `coef`.
EicReport check_eic(const Dataset& ds, const CoefficientSet& coef, const PenaltyConfig& penalties,
                    Index outcome, Index mediator);

enum class GramMode {
  Partialled,  // support columns residualized on the rest of the stage design
  Raw,         // plain cross-product of the support columns
};

enum class SupportSource { Reference, Estimate };

struct NormalityOptions {
  GramMode gram = GramMode::Partialled;
  SupportSource support = SupportSource::Reference;
};

struct NormalityStat {
  double value = 0.0;
  Vector direction;
  double target_variance = 1.0;
  bool degenerate_variance = false;
  double rho = 0.0;    // min_j |e_j' (C11 + l2/n I)^{-1} C11 b_(1)|
  double c_min = 0.0;  // Lambda_min(C11) + l2/n
  std::vector<Index> support;

  /// value / sqrt(target_variance); empty when the variance is degenerate.
  std::optional<double> studentized() const;
};

/// Symmetric PSD square root via eigendecomposition, eigenvalues floored at 1e-12.
Matrix symmetric_sqrt(const Matrix& a);

/// sqrt(n) v' (I + l2 G^{-1}) (G/n)^{1/2} (b_hat_(1) - b_(1)) for outcome k,
/// G the Gram of the mediator support columns. Asymptotically N(0, 1).
NormalityStat standardized_beta_stat(const Dataset& ds, const CoefficientSet& reference,
                                     const CoefficientSet& estimate,
                                     const PenaltyConfig& penalties, Index outcome,
                                     const Vector& direction, const NormalityOptions& opts = {});

/// Same sandwich over the exposure support applied to the indirect-effect
/// column k. Asymptotically N(0, beta_k' beta_k).
NormalityStat standardized_mediation_stat(const Dataset& ds, const CoefficientSet& reference,
                                          const CoefficientSet& estimate,
                                          const PenaltyConfig& penalties, Index outcome,
                                          const Vector& direction,
                                          const NormalityOptions& opts = {});

struct BootstrapResult {
  int replicate_count = 0;  // successful replicates
  int failed_count = 0;
  std::vector<Matrix> replicates;  // q x T indirect-effect matrices
  Matrix mean;
  Matrix sd;
  Matrix sign_agreement;  // fraction of replicates whose sign matches sign(mean)
};

/// Pairs bootstrap: rows of all blocks resampled jointly, each replicate refit.
/// Replicates that throw or fail to converge are dropped; more than 20% dropped
/// raises TooManyFailures.
BootstrapResult bootstrap_indirect(const Dataset& ds, const PenaltyConfig& penalties,
                                   const MmmFitOptions& opts, int replicates,
                                   std::uint64_t seed);

/// 1e-8 * max |entry| over all replicates.
double default_stability_threshold(const BootstrapResult& br);

/// Mean over entries of the modal-class share of thresholded signs.
double stability_index(const BootstrapResult& br, double threshold);

/// Share of truly-zero entries with |estimate| > threshold; empty if truth has no zeros.
std::optional<double> type1_rate(const Matrix& estimate, const Matrix& truth, double threshold);

struct LambdaScaling {
  double n = 0.0;
  double m1_over_sqrt_n = 0.0, m2_over_n = 0.0;
  double y1_over_sqrt_n = 0.0, y2_over_n = 0.0;
  double m2_over_sqrt_n = 0.0, y2_over_sqrt_n = 0.0;
};

LambdaScaling lambda_scaling(const PenaltyConfig& penalties, Index n);

}  // namespace mmm
