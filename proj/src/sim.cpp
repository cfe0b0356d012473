#include "mmm/sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "mmm/inference.hpp"
#include "mmm/parallel.hpp"
#include "mmm/predict.hpp"
#include "mmm/random.hpp"

namespace mmm {

namespace {

constexpr std::uint64_t kCvStream = 0x4356ULL;
constexpr std::uint64_t kBootstrapStream = 0x424fULL;

void fill_blocks(Matrix& target, const std::vector<Block>& blocks, const char* label) {
  for (const Block& b : blocks) {
    const bool ok = b.row_begin >= 0 && b.col_begin >= 0 && b.rows >= 0 && b.cols >= 0 &&
                    b.row_begin + b.rows <= target.rows() && b.col_begin + b.cols <= target.cols();
    if (!ok) {
      throw Error(ErrorCode::BlockOutOfRange,
                  std::string(label) + " block exceeds " + std::to_string(target.rows()) + "x" +
                      std::to_string(target.cols()));
    }
    if (!std::isfinite(b.magnitude)) {
      throw Error(ErrorCode::NonFiniteInput, std::string(label) + " block magnitude is not finite");
    }
    target.block(b.row_begin, b.col_begin, b.rows, b.cols).setConstant(b.magnitude);
  }
}

double truncated_normal(NormalSampler& rng, double mean, double sd, double lo, double hi) {
  for (;;) {
    const double v = mean + sd * rng.standard();
    if (v >= lo && v <= hi) return v;
  }
}

MetricSummary summarize(std::vector<double> values) {
  MetricSummary out;
  out.values = values;
  if (values.empty()) return out;
  double total = 0.0;
  for (double v : values) total += v;
  out.mean = total / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  const std::size_t h = values.size() / 2;
  out.median = values.size() % 2 ? values[h] : 0.5 * (values[h - 1] + values[h]);
  return out;
}

Vector uniform_direction(Index d) {
  return Vector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
}

struct ReplicateScore {
  std::optional<std::string> failure;
  std::optional<double> nrmse_alpha, nrmse_beta, nrmse_indirect;
  std::optional<double> corr_alpha, corr_beta, corr_indirect;
  std::optional<double> type1_alpha, type1_beta;
  std::optional<double> qq_beta, qq_mediation;
};

std::optional<double> nrmse_if_defined(const Matrix& est, const Matrix& truth) {
  if (truth.squaredNorm() == 0.0) return std::nullopt;
  return nrmse(est, truth);
}

}  // namespace

TruthSpec default_truth_spec() {
  TruthSpec spec;
  spec.alpha = {{0, 5, 0, 5, 1.0}, {5, 5, 5, 5, 1.0}};
  spec.beta = {{0, 5, 0, 3, 1.0}, {5, 5, 3, 3, 1.0}};
  spec.gamma = {{10, 4, 0, 3, 0.2}};
  return spec;
}

void SimConfig::validate() const {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "n must be at least 2");
  if (q < 1 || p < 1 || outcomes < 1 || covariates < 0) {
    throw Error(ErrorCode::InvalidArgument, "block dimensions must be positive");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::InvalidArgument, "sigma must be positive and finite");
  }
  if (!(rho >= 0.0 && rho < 1.0)) throw Error(ErrorCode::InvalidArgument, "rho must lie in [0, 1)");
}

CoefficientSet GroundTruth::as_coefficients() const {
  CoefficientSet c;
  c.alpha = alpha;
  c.zeta = zeta;
  c.beta = beta;
  c.gamma = gamma;
  c.eta = eta;
  return c;
}

GroundTruth generate_truth(const SimConfig& cfg) {
  cfg.validate();
  const Index s = cfg.covariates + 1;
  GroundTruth t;
  t.alpha = Matrix::Zero(cfg.q, cfg.p);
  t.beta = Matrix::Zero(cfg.p, cfg.outcomes);
  t.gamma = Matrix::Zero(cfg.q, cfg.outcomes);
  fill_blocks(t.alpha, cfg.truth.alpha, "alpha");
  fill_blocks(t.beta, cfg.truth.beta, "beta");
  fill_blocks(t.gamma, cfg.truth.gamma, "gamma");
  t.zeta = Matrix::Constant(s, cfg.p, cfg.truth.zeta_value);
  t.eta = Matrix::Constant(s, cfg.outcomes, cfg.truth.eta_value);
  t.indirect = indirect_effect_matrix(t.as_coefficients());
  return t;
}

Dataset generate_dataset(const GroundTruth& truth, const SimConfig& cfg) {
  cfg.validate();
  if (truth.alpha.rows() != cfg.q || truth.alpha.cols() != cfg.p ||
      truth.beta.cols() != cfg.outcomes || truth.zeta.rows() != cfg.covariates + 1) {
    throw Error(ErrorCode::ShapeMismatch, "ground truth does not match the configuration");
  }
  NormalSampler rng(cfg.seed);
  const Index n = cfg.n;

  Matrix sigma_x(cfg.q, cfg.q);
  for (Index i = 0; i < cfg.q; ++i)
    for (Index j = 0; j < cfg.q; ++j)
      sigma_x(i, j) = std::pow(cfg.rho, static_cast<double>(std::abs(i - j)));
  const Matrix chol = sigma_x.llt().matrixL();
  const Matrix x = rng.standard_matrix(n, cfg.q) * chol.transpose();

  Matrix z(n, cfg.covariates + 1);
  z.col(0).setOnes();
  for (Index i = 0; i < n; ++i) {
    if (cfg.covariates >= 1) z(i, 1) = truncated_normal(rng, 70.0, 8.0, 50.0, 95.0);
    if (cfg.covariates >= 2) z(i, 2) = rng.uniform() < 0.5 ? 1.0 : 0.0;
    for (Index c = 3; c <= cfg.covariates; ++c) z(i, c) = rng.standard();
  }

  const Matrix m = x * truth.alpha + z * truth.zeta + cfg.sigma * rng.standard_matrix(n, cfg.p);
  const Matrix y = m * truth.beta + x * truth.gamma + z * truth.eta +
                   (cfg.sigma * cfg.sigma) * rng.standard_matrix(n, cfg.outcomes);

  ColumnNames names;
  names.z.push_back("intercept");
  if (cfg.covariates >= 1) names.z.push_back("age");
  if (cfg.covariates >= 2) names.z.push_back("sex");
  for (Index c = 3; c <= cfg.covariates; ++c) names.z.push_back("z" + std::to_string(c));
  return Dataset(x, m, y, z, names);
}

double nrmse(const Matrix& estimate, const Matrix& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "estimate and truth shapes differ");
  }
  const double denom = truth.norm();
  if (denom == 0.0) throw Error(ErrorCode::ZeroTruthNorm, "truth is all zero");
  return (estimate - truth).norm() / denom;
}

std::optional<double> matrix_correlation(const Matrix& estimate, const Matrix& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "estimate and truth shapes differ");
  }
  const Eigen::Map<const Vector> a(estimate.data(), estimate.size());
  const Eigen::Map<const Vector> b(truth.data(), truth.size());
  return pearson(a, b);
}

MmmFitOptions default_sim_fit_options() {
  MmmFitOptions o;
  o.penalize_intercept = false;
  return o;
}

SimCell run_cell(const GroundTruth& truth, const SimConfig& cfg, const CellOptions& opts) {
  cfg.validate();
  if (opts.replicates < 1) throw Error(ErrorCode::InvalidArgument, "need at least one replicate");

  SimCell cell;
  cell.n = cfg.n;
  cell.sigma = cfg.sigma;
  cell.seed = cfg.seed;
  cell.replicates = opts.replicates;

  auto dataset_for = [&](int r) {
    SimConfig c = cfg;
    c.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(r)});
    return generate_dataset(truth, c);
  };
  const Dataset first = dataset_for(0);

  MmmFitOptions outer = opts.fit;
  outer.solver.threads = opts.threads;
  MmmFitOptions inner = opts.fit;
  inner.solver.threads = 1;

  if (opts.penalties) {
    cell.penalties = *opts.penalties;
  } else {
    CvOptions cv;
    cv.folds = opts.folds;
    cv.seed = derive_seed(cfg.seed, {kCvStream});
    cv.fit = outer;
    cell.penalties = cv_select(first, default_lambda_grid(first, Stage::Mediator),
                               default_lambda_grid(first, Stage::Outcome), cv)
                         .penalties;
  }
  cell.penalties.validate();

  const CoefficientSet truth_coef = truth.as_coefficients();
  const double sigma_m = cfg.sigma, sigma_y = cfg.sigma * cfg.sigma;
  const bool qq_possible = opts.collect_qq && truth.beta.col(0).squaredNorm() > 0.0 &&
                           truth.alpha.squaredNorm() > 0.0;

  std::vector<ReplicateScore> scores(static_cast<std::size_t>(opts.replicates));
  parallel_for(scores.size(), opts.threads, [&](std::size_t idx) {
    ReplicateScore& sc = scores[idx];
    const int r = static_cast<int>(idx);
    try {
      const Dataset ds = r == 0 ? first : dataset_for(r);
      const CoefficientSet est = fit_mmm(ds, cell.penalties, inner);
      if (!est.diagnostics.all_converged()) {
        sc.failure = "replicate " + std::to_string(r) + ": solver did not converge";
        return;
      }
      const Matrix indirect = indirect_effect_matrix(est);
      sc.nrmse_alpha = nrmse_if_defined(est.alpha, truth.alpha);
      sc.nrmse_beta = nrmse_if_defined(est.beta, truth.beta);
      sc.nrmse_indirect = nrmse_if_defined(indirect, truth.indirect);
      sc.corr_alpha = matrix_correlation(est.alpha, truth.alpha);
      sc.corr_beta = matrix_correlation(est.beta, truth.beta);
      sc.corr_indirect = matrix_correlation(indirect, truth.indirect);
      sc.type1_alpha = type1_rate(est.alpha, truth.alpha, opts.threshold);
      sc.type1_beta = type1_rate(est.beta, truth.beta, opts.threshold);

      if (qq_possible) {
        // Statistics are formed on the solver's scale, where the ridge term acts.
        const auto [sds, rec] = scale_columns(ds);
        const CoefficientSet ref_s = scale_coefficients(truth_coef, rec);
        const CoefficientSet est_s = scale_coefficients(est, rec);
        try {
          const Index d = static_cast<Index>(
              (ref_s.beta.col(0).array() != 0.0).count());
          const NormalityStat b = standardized_beta_stat(sds, ref_s, est_s, cell.penalties, 0,
                                                         uniform_direction(d));
          sc.qq_beta = b.value / sigma_y;
        } catch (const Error&) {
        }
        try {
          const Index d = static_cast<Index>(
              (ref_s.alpha.cwiseAbs().rowwise().sum().array() != 0.0).count());
          const NormalityStat med = standardized_mediation_stat(
              sds, ref_s, est_s, cell.penalties, 0, uniform_direction(d));
          if (auto v = med.studentized()) sc.qq_mediation = *v / sigma_m;
        } catch (const Error&) {
        }
      }
    } catch (const std::exception& e) {
      sc.failure = "replicate " + std::to_string(r) + ": " + e.what();
    }
  });

  std::vector<double> na, nb, ni, ca, cb, ci, ta, tb;
  for (const auto& sc : scores) {
    if (sc.failure) {
      ++cell.failed;
      cell.failures.push_back(*sc.failure);
      continue;
    }
    auto push = [](std::vector<double>& v, const std::optional<double>& x) {
      if (x) v.push_back(*x);
    };
    push(na, sc.nrmse_alpha);
    push(nb, sc.nrmse_beta);
    push(ni, sc.nrmse_indirect);
    push(ca, sc.corr_alpha);
    push(cb, sc.corr_beta);
    push(ci, sc.corr_indirect);
    push(ta, sc.type1_alpha);
    push(tb, sc.type1_beta);
    push(cell.qq_beta, sc.qq_beta);
    push(cell.qq_mediation, sc.qq_mediation);
  }
  cell.nrmse_alpha = summarize(na);
  cell.nrmse_beta = summarize(nb);
  cell.nrmse_indirect = summarize(ni);
  cell.corr_alpha = summarize(ca);
  cell.corr_beta = summarize(cb);
  cell.corr_indirect = summarize(ci);
  cell.type1_alpha = summarize(ta);
  cell.type1_beta = summarize(tb);

  if (cell.failed == cell.replicates) {
    cell.aborted = true;
    cell.abort_reason = "every replicate failed";
    return cell;
  }

  if (opts.bootstrap_b > 0) {
    const BootstrapResult br = bootstrap_indirect(first, cell.penalties, outer, opts.bootstrap_b,
                                                  derive_seed(cfg.seed, {kBootstrapStream}));
    cell.stability = stability_index(br, opts.threshold);
  }
  return cell;
}

bool GridResult::any_aborted() const {
  return std::any_of(cells.begin(), cells.end(), [](const SimCell& c) { return c.aborted; });
}

bool decreasing_with_tolerance(const std::vector<double>& values, double tolerance,
                               int* inversions) {
  int count = 0;
  bool within = true;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    if (values[i + 1] < values[i]) continue;
    ++count;
    if (values[i + 1] - values[i] > tolerance * std::abs(values[i])) within = false;
  }
  if (inversions) *inversions = count;
  return within && count <= 1;
}

GridResult run_grid(const GroundTruth& truth, const SimConfig& cfg,
                    const std::vector<Index>& n_list, const std::vector<double>& sigma_list,
                    const CellOptions& opts) {
  if (n_list.empty() || sigma_list.empty()) {
    throw Error(ErrorCode::InvalidArgument, "n and sigma lists must be non-empty");
  }
  GridResult out;
  for (Index n : n_list) {
    for (double sigma : sigma_list) {
      SimConfig c = cfg;
      c.n = n;
      c.sigma = sigma;
      c.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(n), std::bit_cast<std::uint64_t>(sigma)});
      try {
        out.cells.push_back(run_cell(truth, c, opts));
      } catch (const std::exception& e) {
        SimCell failed;
        failed.n = n;
        failed.sigma = sigma;
        failed.seed = c.seed;
        failed.replicates = opts.replicates;
        failed.aborted = true;
        failed.abort_reason = e.what();
        out.cells.push_back(std::move(failed));
      }
    }
  }

  if (n_list.size() < 2) return out;
  std::vector<Index> ordered = n_list;
  std::sort(ordered.begin(), ordered.end());
  for (double sigma : sigma_list) {
    const std::pair<const char*, MetricSummary SimCell::*> metrics[] = {
        {"nrmse_alpha", &SimCell::nrmse_alpha},
        {"nrmse_beta", &SimCell::nrmse_beta},
        {"nrmse_indirect", &SimCell::nrmse_indirect}};
    for (const auto& [name, member] : metrics) {
      TrendCheck tc;
      tc.sigma = sigma;
      tc.metric = name;
      bool complete = true;
      for (Index n : ordered) {
        const auto it = std::find_if(out.cells.begin(), out.cells.end(), [&](const SimCell& c) {
          return c.n == n && c.sigma == sigma;
        });
        if (it == out.cells.end() || it->aborted || !((*it).*member).defined()) {
          complete = false;
          break;
        }
        tc.medians.push_back(((*it).*member).median);
      }
      if (!complete) continue;
      tc.holds = decreasing_with_tolerance(tc.medians, 0.05, &tc.inversions);
      out.trends.push_back(std::move(tc));
    }
  }
  return out;
}

}  // namespace mmm
