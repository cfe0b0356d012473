#pragma once

#include <tuple>
#include <vector>

#include "mmm/solver.hpp"
#include "mmm/types.hpp"

namespace mmm {

struct MmmFitOptions {
  SolverOptions solver;
  bool scale = true;               // normalize x and m columns to norm sqrt(n) before solving
  bool penalize_intercept = true;  // the objective penalizes all of zeta and eta
};

// Per-stage results, already mapped back to the original data scale.
struct MediatorStageFit {
  Matrix alpha;  // q x p
  Matrix zeta;   // s x p
  std::vector<ColumnDiagnostics> diagnostics;
};

struct OutcomeStageFit {
  Matrix beta;   // p x T
  Matrix gamma;  // q x T
  Matrix eta;    // s x T
  std::vector<ColumnDiagnostics> diagnostics;
};

/// Stage 1: [x | z] -> m with (lambda1, lambda2) = (lambda_m1, lambda_m2).
MediatorStageFit fit_mediator_stage(const Dataset& ds, double lambda1, double lambda2,
                                    const MmmFitOptions& opts = {});

/// Stage 2: [m | x | z] -> y with (lambda1, lambda2) = (lambda_y1, lambda_y2).
OutcomeStageFit fit_outcome_stage(const Dataset& ds, double lambda1, double lambda2,
                                  const MmmFitOptions& opts = {});

/// Two-stage elastic-net fit of the many-to-many-to-many model.
CoefficientSet fit_mmm(const Dataset& ds, const PenaltyConfig& penalties,
                       const MmmFitOptions& opts = {});

/// Penalty mask for a stage design whose trailing s columns are [1 | z].
std::vector<bool> stage_penalty_mask(Index leading_columns, Index s, bool penalize_intercept);

/// alpha * beta, accumulated entry by entry so that global_effect matches it exactly.
Matrix indirect_effect_matrix(const CoefficientSet& coef);

double global_effect(const CoefficientSet& coef, Index j, Index l);
double path_effect(const CoefficientSet& coef, Index j, Index k, Index l);

/// (x_new - x_ref)' gamma_l
double cde(const CoefficientSet& coef, const Vector& x_new, const Vector& x_ref, Index l);
/// Coincides with cde under the linear structural model.
double nde(const CoefficientSet& coef, const Vector& x_new, const Vector& x_ref, Index l);
/// (x_new - x_ref)' (alpha beta)_l
double nie(const CoefficientSet& coef, const Vector& x_new, const Vector& x_ref, Index l);

// Indirect-effect matrix plus on-demand per-path products; the q x p x T
// path tensor is never stored.
class MediationEffects {
 public:
  explicit MediationEffects(const CoefficientSet& coef);

  const Matrix& indirect() const { return indirect_; }
  double global(Index j, Index l) const;
  double path(Index j, Index k, Index l) const;

  Index exposures() const { return alpha_.rows(); }
  Index mediators() const { return alpha_.cols(); }
  Index outcomes() const { return beta_.cols(); }

 private:
  Matrix alpha_;
  Matrix beta_;
  Matrix indirect_;
};

struct PathEffect {
  Index exposure;
  Index mediator;
  Index outcome;
  double value;
};

/// The `count` largest |alpha_jk beta_kl|, descending; ties by ascending (j, k, l).
std::vector<PathEffect> top_paths(const MediationEffects& effects, std::size_t count);

}  // namespace mmm
