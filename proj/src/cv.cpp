#include "mmm/cv.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "mmm/parallel.hpp"
#include "mmm/predict.hpp"
#include "mmm/random.hpp"

namespace mmm {

namespace {

struct FoldData {
  Dataset train;
  Dataset test;
};

std::size_t pick_best(const std::vector<double>& scores, const std::vector<LambdaPair>& grid) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    const double a = scores[i], b = scores[best];
    const bool tie = std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
    if (tie) {
      if (grid[i].lambda1 + grid[i].lambda2 > grid[best].lambda1 + grid[best].lambda2) best = i;
    } else if (a < b) {
      best = i;
    }
  }
  return best;
}

double mean_squared(const Matrix& a) {
  return a.squaredNorm() / static_cast<double>(a.size());
}

}  // namespace

std::vector<std::vector<Index>> cv_folds(Index n, int folds, std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 folds");
  if (n < 2 * static_cast<Index>(folds)) {
    throw Error(ErrorCode::TooFewRows, "cross-validation needs n >= 2K rows");
  }
  const std::vector<Index> order = shuffled_indices(n, seed);
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(folds));
  for (int f = 0; f < folds; ++f) {
    const Index begin = n * f / folds, end = n * (f + 1) / folds;
    auto& fold = out[static_cast<std::size_t>(f)];
    fold.assign(order.begin() + begin, order.begin() + end);
    std::sort(fold.begin(), fold.end());
  }
  return out;
}

CvResult cv_select(const Dataset& ds, const std::vector<LambdaPair>& grid_m,
                   const std::vector<LambdaPair>& grid_y, const CvOptions& opts) {
  if (grid_m.empty() || grid_y.empty()) throw Error(ErrorCode::GridEmpty, "penalty grid is empty");
  for (const auto& g : grid_m) PenaltyConfig{g.lambda1, g.lambda2, 0.0, 0.0}.validate();
  for (const auto& g : grid_y) PenaltyConfig{0.0, 0.0, g.lambda1, g.lambda2}.validate();
  (void)ds.m();
  (void)ds.y();

  const auto folds = cv_folds(ds.n(), opts.folds, opts.seed);
  std::vector<FoldData> data;
  for (const auto& test_rows : folds) {
    std::vector<Index> train_rows;
    std::size_t t = 0;
    for (Index i = 0; i < ds.n(); ++i) {
      if (t < test_rows.size() && test_rows[t] == i) {
        ++t;
      } else {
        train_rows.push_back(i);
      }
    }
    data.push_back({ds.select_rows(train_rows), ds.select_rows(test_rows)});
  }

  MmmFitOptions inner = opts.fit;
  inner.solver.threads = 1;
  const int threads = opts.fit.solver.threads;

  CvResult result;
  result.mediator_scores.assign(grid_m.size(), 0.0);
  parallel_for(grid_m.size(), threads, [&](std::size_t g) {
    double total = 0.0;
    for (const auto& fd : data) {
      const MediatorStageFit fit =
          fit_mediator_stage(fd.train, grid_m[g].lambda1, grid_m[g].lambda2, inner);
      const Matrix resid = fd.test.m() - fd.test.x() * fit.alpha - fd.test.z() * fit.zeta;
      total += mean_squared(resid);
    }
    result.mediator_scores[g] = total / static_cast<double>(data.size());
  });
  const LambdaPair chosen_m = grid_m[pick_best(result.mediator_scores, grid_m)];

  std::vector<std::optional<Matrix>> mediated(data.size());
  if (opts.mode == CvMode::Mediated) {
    for (std::size_t f = 0; f < data.size(); ++f) {
      const MediatorStageFit fit =
          fit_mediator_stage(data[f].train, chosen_m.lambda1, chosen_m.lambda2, inner);
      mediated[f] = data[f].test.x() * fit.alpha + data[f].test.z() * fit.zeta;
    }
  }

  result.outcome_scores.assign(grid_y.size(), 0.0);
  parallel_for(grid_y.size(), threads, [&](std::size_t g) {
    double total = 0.0;
    for (std::size_t f = 0; f < data.size(); ++f) {
      const auto& fd = data[f];
      const OutcomeStageFit fit =
          fit_outcome_stage(fd.train, grid_y[g].lambda1, grid_y[g].lambda2, inner);
      const Matrix& m = mediated[f] ? *mediated[f] : fd.test.m();
      const Matrix resid =
          fd.test.y() - m * fit.beta - fd.test.x() * fit.gamma - fd.test.z() * fit.eta;
      total += mean_squared(resid);
    }
    result.outcome_scores[g] = total / static_cast<double>(data.size());
  });
  const LambdaPair chosen_y = grid_y[pick_best(result.outcome_scores, grid_y)];

  result.penalties = {chosen_m.lambda1, chosen_m.lambda2, chosen_y.lambda1, chosen_y.lambda2};
  return result;
}

std::vector<LambdaPair> default_lambda_grid(const Dataset& ds, Stage stage) {
  const auto scaled = scale_columns(ds).first;
  Matrix design;
  Matrix responses;
  if (stage == Stage::Mediator) {
    design = scaled.x();
    responses = ds.m();
  } else {
    design.resize(ds.n(), ds.p() + ds.q());
    design << scaled.m(), scaled.x();
    responses = ds.y();
  }
  responses = responses.rowwise() - responses.colwise().mean();
  const double lambda_max = 2.0 * (design.transpose() * responses).cwiseAbs().maxCoeff();
  const double n = static_cast<double>(ds.n());

  std::vector<LambdaPair> grid;
  for (double frac : {1.0, 0.5, 0.25, 0.1, 0.05, 0.025, 0.01, 0.001}) {
    for (double l2 : {0.0, 0.05 * n}) grid.push_back({frac * lambda_max, l2});
  }
  return grid;
}

}  // namespace mmm
