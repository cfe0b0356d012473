#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmm/cv.hpp"
#include "mmm/estimator.hpp"
#include "mmm/types.hpp"

namespace mmm {

struct Block {
  Index row_begin = 0;
  Index rows = 0;
  Index col_begin = 0;
  Index cols = 0;
  double magnitude = 1.0;
};

struct TruthSpec {
  std::vector<Block> alpha;
  std::vector<Block> beta;
  std::vector<Block> gamma;
  double zeta_value = 0.1;
  double eta_value = 0.1;
};

/// Two disjoint 5x5 blocks of 1.0 in alpha, two 5x3 blocks of 1.0 in beta,
/// a 4x3 block of 0.2 in gamma.
TruthSpec default_truth_spec();

struct SimConfig {
  Index n = 1000;
  Index q = 20;
  Index p = 20;
  Index outcomes = 10;
  Index covariates = 2;  // age and sex; z gets the intercept on top
  double sigma = 50.0;
  double rho = 0.5;
  std::uint64_t seed = 0;
  TruthSpec truth = default_truth_spec();

  void validate() const;
};

struct GroundTruth {
  Matrix alpha;     // q x p
  Matrix beta;      // p x T
  Matrix gamma;     // q x T
  Matrix zeta;      // s x p
  Matrix eta;       // s x T
  Matrix indirect;  // alpha * beta

  CoefficientSet as_coefficients() const;
};

GroundTruth generate_truth(const SimConfig& cfg);

/// z = [1 | age | sex], x ~ MVN(0, rho^|i-j|), m = x alpha + z zeta + sigma E,
/// y = m beta + x gamma + z eta + sigma^2 Xi.
Dataset generate_dataset(const GroundTruth& truth, const SimConfig& cfg);

/// ||estimate - truth||_F / ||truth||_F; ZeroTruthNorm for an all-zero truth.
double nrmse(const Matrix& estimate, const Matrix& truth);

/// Pearson correlation of the flattened entries; empty if either is constant.
std::optional<double> matrix_correlation(const Matrix& estimate, const Matrix& truth);

/// Library defaults with the intercept left unpenalized.
MmmFitOptions default_sim_fit_options();

struct CellOptions {
  int replicates = 5;
  std::optional<PenaltyConfig> penalties;  // when empty, CV on replicate 0
  int folds = 5;
  int bootstrap_b = 10;                    // 0 disables the stability index
  double threshold = 1e-6;                 // type-I and stability sign threshold
  bool collect_qq = true;
  int threads = 1;
  MmmFitOptions fit = default_sim_fit_options();
};

struct MetricSummary {
  std::vector<double> values;  // one per successful replicate that defines it
  double mean = 0.0;
  double median = 0.0;
  bool defined() const { return !values.empty(); }
};

struct SimCell {
  Index n = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  PenaltyConfig penalties;
  int replicates = 0;
  int failed = 0;
  std::vector<std::string> failures;

  MetricSummary nrmse_alpha, nrmse_beta, nrmse_indirect;
  MetricSummary corr_alpha, corr_beta, corr_indirect;
  MetricSummary type1_alpha, type1_beta;
  std::optional<double> stability;

  std::vector<double> qq_beta;       // standardized beta statistic, outcome 0
  std::vector<double> qq_mediation;  // studentized mediation statistic, outcome 0

  bool aborted = false;
  std::string abort_reason;
};

/// R datasets from the same truth at (cfg.n, cfg.sigma), each fit and scored.
SimCell run_cell(const GroundTruth& truth, const SimConfig& cfg, const CellOptions& opts);

struct TrendCheck {
  double sigma = 0.0;
  std::string metric;
  std::vector<double> medians;  // ordered by n
  int inversions = 0;
  bool holds = false;
};

struct GridResult {
  std::vector<SimCell> cells;  // n-major, then sigma
  std::vector<TrendCheck> trends;
  bool any_aborted() const;
};

/// Decreasing in order, allowing one rise of at most `tolerance` relative.
bool decreasing_with_tolerance(const std::vector<double>& values, double tolerance,
                               int* inversions = nullptr);

/// Cartesian (n, sigma) grid; each cell seeded from (cfg.seed, n, sigma).
/// A failing cell is recorded as aborted and the grid continues.
GridResult run_grid(const GroundTruth& truth, const SimConfig& cfg,
                    const std::vector<Index>& n_list, const std::vector<double>& sigma_list,
                    const CellOptions& opts);

}  // namespace mmm
