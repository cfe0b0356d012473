#pragma once

#include <cstdint>
#include <vector>

#include "mmm/estimator.hpp"
#include "mmm/types.hpp"

namespace mmm {

struct LambdaPair {
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  bool operator==(const LambdaPair&) const = default;
};

enum class CvMode {
  Observed,  // stage-2 candidates scored with observed held-out mediators
  Mediated,  // stage-2 candidates scored with mediators predicted by stage 1
};

struct CvOptions {
  int folds = 5;
  std::uint64_t seed = 0;
  CvMode mode = CvMode::Observed;
  MmmFitOptions fit;
};

struct CvResult {
  PenaltyConfig penalties;
  std::vector<double> mediator_scores;  // held-out MSE per grid_m entry
  std::vector<double> outcome_scores;   // held-out MSE per grid_y entry
};

/// Held-out row sets: a seeded Fisher-Yates shuffle cut into K contiguous blocks.
std::vector<std::vector<Index>> cv_folds(Index n, int folds, std::uint64_t seed);

/// Stage-wise K-fold selection of (lambda1, lambda2) per stage. Ties (relative
/// 1e-12) go to the larger lambda1 + lambda2, then to the earlier grid entry.
CvResult cv_select(const Dataset& ds, const std::vector<LambdaPair>& grid_m,
                   const std::vector<LambdaPair>& grid_y, const CvOptions& opts = {});

enum class Stage { Mediator, Outcome };

/// Data-adaptive grid: lambda1 on a ladder below 2 max|d_j' y_c| of the scaled
/// penalized columns, crossed with lambda2 in {0, 0.05 n}.
std::vector<LambdaPair> default_lambda_grid(const Dataset& ds, Stage stage);

}  // namespace mmm
