#include "mmm/estimator.hpp"

#include <algorithm>
#include <queue>

namespace mmm {

namespace {

void check_fit_preconditions(const Dataset& ds, const MmmFitOptions& opts) {
  if (!ds.has_mediators()) throw Error(ErrorCode::MissingBlock, "fit requires a mediator block");
  if (ds.n() < 2) throw Error(ErrorCode::InvalidArgument, "fit requires at least 2 rows");
  if (opts.solver.warm_start) {
    throw Error(ErrorCode::InvalidArgument, "warm starts are per-design; not supported by fit_mmm");
  }
  if (!opts.solver.penalty_mask.empty()) {
    throw Error(ErrorCode::InvalidArgument,
                "stage masks are derived from penalize_intercept; leave penalty_mask empty");
  }
}

struct StageInputs {
  Matrix x;
  Matrix m;
  Vector x_scale;
  Vector m_scale;
};

StageInputs prepare(const Dataset& ds, bool scale) {
  if (!scale) {
    return {ds.x(), ds.m(), Vector::Ones(ds.q()), Vector::Ones(ds.p())};
  }
  auto [scaled, rec] = scale_columns(ds);
  return {scaled.x(), scaled.m(), rec.x_scale, rec.m_scale};
}

std::vector<ColumnDiagnostics> summarize(const MultiResponseFit& fit) {
  std::vector<ColumnDiagnostics> out;
  out.reserve(fit.reports.size());
  for (const auto& r : fit.reports) out.push_back({r.iterations, r.objective, r.converged});
  return out;
}

MultiResponseFit run_stage(const Matrix& design, const Matrix& responses, double lambda1,
                           double lambda2, const SolverOptions& base, std::vector<bool> mask,
                           const char* label) {
  SolverOptions opts = base;
  opts.penalty_mask = std::move(mask);
  try {
    return fit_multiresponse(design, responses, lambda1, lambda2, opts);
  } catch (const Error& e) {
    throw e.with_context(label);
  }
}

void check_index(Index v, Index bound, const char* label) {
  if (v < 0 || v >= bound) {
    throw Error(ErrorCode::IndexOutOfRange, std::string(label) + " index " + std::to_string(v) +
                                                " out of range [0, " + std::to_string(bound) + ")");
  }
}

Vector contrast(const CoefficientSet& coef, const Vector& x_new, const Vector& x_ref, Index l) {
  if (x_new.size() != coef.q() || x_ref.size() != coef.q()) {
    throw Error(ErrorCode::DimensionMismatch, "exposure vectors must have length q");
  }
  check_index(l, coef.outcomes(), "outcome");
  return x_new - x_ref;
}

}  // namespace

std::vector<bool> stage_penalty_mask(Index leading_columns, Index s, bool penalize_intercept) {
  std::vector<bool> mask(static_cast<std::size_t>(leading_columns + s), true);
  if (!penalize_intercept) mask[static_cast<std::size_t>(leading_columns)] = false;
  return mask;
}

MediatorStageFit fit_mediator_stage(const Dataset& ds, double lambda1, double lambda2,
                                    const MmmFitOptions& opts) {
  check_fit_preconditions(ds, opts);
  const Index q = ds.q(), s = ds.s();
  const StageInputs in = prepare(ds, opts.scale);

  Matrix design(ds.n(), q + s);
  design << in.x, ds.z();
  const MultiResponseFit fit =
      run_stage(design, ds.m(), lambda1, lambda2, opts.solver,
                stage_penalty_mask(q, s, opts.penalize_intercept), "mediator stage");

  MediatorStageFit out;
  out.alpha = in.x_scale.asDiagonal() * fit.coefficients.topRows(q);
  out.zeta = fit.coefficients.bottomRows(s);
  out.diagnostics = summarize(fit);
  return out;
}

OutcomeStageFit fit_outcome_stage(const Dataset& ds, double lambda1, double lambda2,
                                  const MmmFitOptions& opts) {
  check_fit_preconditions(ds, opts);
  if (!ds.has_outcomes()) throw Error(ErrorCode::MissingBlock, "fit requires an outcome block");
  const Index q = ds.q(), p = ds.p(), s = ds.s();
  const StageInputs in = prepare(ds, opts.scale);

  Matrix design(ds.n(), p + q + s);
  design << in.m, in.x, ds.z();
  const MultiResponseFit fit =
      run_stage(design, ds.y(), lambda1, lambda2, opts.solver,
                stage_penalty_mask(p + q, s, opts.penalize_intercept), "outcome stage");

  OutcomeStageFit out;
  out.beta = in.m_scale.asDiagonal() * fit.coefficients.topRows(p);
  out.gamma = in.x_scale.asDiagonal() * fit.coefficients.middleRows(p, q);
  out.eta = fit.coefficients.bottomRows(s);
  out.diagnostics = summarize(fit);
  return out;
}

CoefficientSet fit_mmm(const Dataset& ds, const PenaltyConfig& penalties,
                       const MmmFitOptions& opts) {
  penalties.validate();
  if (!ds.has_outcomes()) throw Error(ErrorCode::MissingBlock, "fit requires an outcome block");
  MediatorStageFit first = fit_mediator_stage(ds, penalties.lambda_m1, penalties.lambda_m2, opts);
  OutcomeStageFit second = fit_outcome_stage(ds, penalties.lambda_y1, penalties.lambda_y2, opts);

  CoefficientSet coef;
  coef.alpha = std::move(first.alpha);
  coef.zeta = std::move(first.zeta);
  coef.beta = std::move(second.beta);
  coef.gamma = std::move(second.gamma);
  coef.eta = std::move(second.eta);
  coef.diagnostics.mediator_stage = std::move(first.diagnostics);
  coef.diagnostics.outcome_stage = std::move(second.diagnostics);
  coef.names = ds.names();
  return coef;
}

Matrix indirect_effect_matrix(const CoefficientSet& coef) {
  if (coef.beta.rows() != coef.alpha.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "alpha columns differ from beta rows");
  }
  const Index q = coef.q(), p = coef.p(), t = coef.outcomes();
  Matrix out(q, t);
  for (Index l = 0; l < t; ++l) {
    for (Index j = 0; j < q; ++j) {
      double acc = 0.0;
      for (Index k = 0; k < p; ++k) acc += coef.alpha(j, k) * coef.beta(k, l);
      out(j, l) = acc;
    }
  }
  return out;
}

double global_effect(const CoefficientSet& coef, Index j, Index l) {
  check_index(j, coef.q(), "exposure");
  check_index(l, coef.outcomes(), "outcome");
  double acc = 0.0;
  for (Index k = 0; k < coef.p(); ++k) acc += coef.alpha(j, k) * coef.beta(k, l);
  return acc;
}

double path_effect(const CoefficientSet& coef, Index j, Index k, Index l) {
  check_index(j, coef.q(), "exposure");
  check_index(k, coef.p(), "mediator");
  check_index(l, coef.outcomes(), "outcome");
  return coef.alpha(j, k) * coef.beta(k, l);
}

double cde(const CoefficientSet& coef, const Vector& x_new, const Vector& x_ref, Index l) {
  return contrast(coef, x_new, x_ref, l).dot(coef.gamma.col(l));
}

double nde(const CoefficientSet& coef, const Vector& x_new, const Vector& x_ref, Index l) {
  return cde(coef, x_new, x_ref, l);
}

double nie(const CoefficientSet& coef, const Vector& x_new, const Vector& x_ref, Index l) {
  const Vector diff = contrast(coef, x_new, x_ref, l);
  double acc = 0.0;
  for (Index j = 0; j < coef.q(); ++j) acc += diff(j) * global_effect(coef, j, l);
  return acc;
}

MediationEffects::MediationEffects(const CoefficientSet& coef)
    : alpha_(coef.alpha), beta_(coef.beta), indirect_(indirect_effect_matrix(coef)) {}

double MediationEffects::global(Index j, Index l) const {
  check_index(j, exposures(), "exposure");
  check_index(l, outcomes(), "outcome");
  return indirect_(j, l);
}

double MediationEffects::path(Index j, Index k, Index l) const {
  check_index(j, exposures(), "exposure");
  check_index(k, mediators(), "mediator");
  check_index(l, outcomes(), "outcome");
  return alpha_(j, k) * beta_(k, l);
}

std::vector<PathEffect> top_paths(const MediationEffects& effects, std::size_t count) {
  const Index q = effects.exposures(), p = effects.mediators(), t = effects.outcomes();
  const auto total = static_cast<std::size_t>(q * p * t);
  count = std::min(count, total);
  if (count == 0) return {};

  // "a ranks before b": larger magnitude first, then lexicographic (j, k, l).
  auto before = [](const PathEffect& a, const PathEffect& b) {
    const double ma = std::abs(a.value), mb = std::abs(b.value);
    if (ma != mb) return ma > mb;
    return std::tie(a.exposure, a.mediator, a.outcome) <
           std::tie(b.exposure, b.mediator, b.outcome);
  };
  // Max-heap on "ranks last" keeps the current worst kept entry on top.
  std::priority_queue<PathEffect, std::vector<PathEffect>, decltype(before)> kept(before);
  for (Index j = 0; j < q; ++j) {
    for (Index k = 0; k < p; ++k) {
      for (Index l = 0; l < t; ++l) {
        PathEffect cand{j, k, l, effects.path(j, k, l)};
        if (kept.size() < count) {
          kept.push(cand);
        } else if (before(cand, kept.top())) {
          kept.pop();
          kept.push(cand);
        }
      }
    }
  }
  std::vector<PathEffect> out;
  out.reserve(kept.size());
  while (!kept.empty()) {
    out.push_back(kept.top());
    kept.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace mmm
